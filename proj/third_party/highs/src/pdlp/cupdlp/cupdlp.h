
#ifndef CUPDLP_H
#define CUPDLP_H

#include "cupdlp_cs.h"
#include "cupdlp_defs.h"
#include "cupdlp_linalg.h"
#include "cupdlp_proj.h"
#include "cupdlp_restart.h"
#include "cupdlp_scaling_cuda.h"
#include "cupdlp_solver.h"
#include "cupdlp_step.h"
#include "cupdlp_utils.h"
#include "glbopts.h"

#endif
