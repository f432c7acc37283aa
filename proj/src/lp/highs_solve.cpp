#include <chrono>
#include <cmath>

#include "Highs.h"
#include "csynth/lp/linear_program.hpp"

namespace csynth::lp {

namespace {

HighsLp to_highs(const LinearProgram& lp) {
  HighsLp h;
  h.num_col_ = lp.num_variables();
  h.num_row_ = lp.num_constraints();
  h.sense_ = ObjSense::kMinimize;
  h.offset_ = lp.objective_offset();
  h.col_cost_ = lp.objective();
  h.col_lower_ = lp.lower_bounds();
  h.col_upper_ = lp.upper_bounds();
  h.row_lower_.reserve(static_cast<std::size_t>(h.num_row_));
  h.row_upper_.reserve(static_cast<std::size_t>(h.num_row_));
  h.a_matrix_.format_ = MatrixFormat::kRowwise;
  h.a_matrix_.num_col_ = h.num_col_;
  h.a_matrix_.num_row_ = h.num_row_;
  h.a_matrix_.start_.assign(1, 0);
  for (const Row& row : lp.rows()) {
    switch (row.sense) {
      case Sense::LessEqual:
        h.row_lower_.push_back(-kHighsInf);
        h.row_upper_.push_back(row.rhs);
        break;
      case Sense::GreaterEqual:
        h.row_lower_.push_back(row.rhs);
        h.row_upper_.push_back(kHighsInf);
        break;
      case Sense::Equal:
        h.row_lower_.push_back(row.rhs);
        h.row_upper_.push_back(row.rhs);
        break;
    }
    for (const Term& t : row.terms) {
      h.a_matrix_.index_.push_back(t.var);
      h.a_matrix_.value_.push_back(t.coef);
    }
    h.a_matrix_.start_.push_back(static_cast<HighsInt>(h.a_matrix_.index_.size()));
  }
  for (double& v : h.col_lower_)
    if (std::isinf(v)) v = -kHighsInf;
  for (double& v : h.col_upper_)
    if (std::isinf(v)) v = kHighsInf;
  return h;
}

void configure(Highs& highs, const SolverOptions& options, bool presolve) {
  highs.setOptionValue("output_flag", false);
  highs.setOptionValue("threads", 1);
  highs.setOptionValue("primal_feasibility_tolerance", options.feasibility_tolerance);
  highs.setOptionValue("dual_feasibility_tolerance", options.optimality_tolerance);
  highs.setOptionValue("presolve", presolve ? "on" : "off");
  highs.setOptionValue("solver", "simplex");
  if (std::isfinite(options.time_limit_seconds))
    highs.setOptionValue("time_limit", options.time_limit_seconds);
}

}  // namespace

LpSolution solve(const LinearProgram& lp, const SolverOptions& options) {
  LpSolution out;
  Highs highs;
  configure(highs, options, options.presolve);
  if (highs.passModel(to_highs(lp)) == HighsStatus::kError) {
    out.status = LpStatus::Error;
    out.message = "model rejected by HiGHS";
    return out;
  }

  auto run = [&]() {
    const auto t0 = std::chrono::steady_clock::now();
    const HighsStatus st = highs.run();
    out.solve_seconds +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return st;
  };

  HighsStatus st = run();
  HighsModelStatus ms = highs.getModelStatus();
  if (ms == HighsModelStatus::kUnboundedOrInfeasible && options.presolve) {
    // Presolve cannot tell the two apart; rerun without it.
    highs.setOptionValue("presolve", "off");
    highs.clearSolver();
    st = run();
    ms = highs.getModelStatus();
  }

  switch (ms) {
    case HighsModelStatus::kOptimal:
    case HighsModelStatus::kModelEmpty: {
      out.status = LpStatus::Optimal;
      const HighsSolution& sol = highs.getSolution();
      out.primal = sol.col_value;
      out.row_sensitivity = sol.row_dual;
      out.reduced_costs = sol.col_dual;
      out.objective_value = highs.getInfo().objective_function_value;
      if (ms == HighsModelStatus::kModelEmpty || out.primal.size() != static_cast<std::size_t>(lp.num_variables())) {
        // Empty model: every variable sits at its bound closest to zero.
        out.primal.assign(static_cast<std::size_t>(lp.num_variables()), 0.0);
        for (std::size_t j = 0; j < out.primal.size(); ++j)
          out.primal[j] = std::clamp(0.0, lp.lower_bounds()[j], lp.upper_bounds()[j]);
        out.row_sensitivity.assign(static_cast<std::size_t>(lp.num_constraints()), 0.0);
        out.reduced_costs = lp.objective();
        out.objective_value = lp.objective_offset();
        for (std::size_t j = 0; j < out.primal.size(); ++j)
          out.objective_value += lp.objective()[j] * out.primal[j];
      }
      break;
    }
    case HighsModelStatus::kInfeasible:
      out.status = LpStatus::Infeasible;
      break;
    case HighsModelStatus::kUnbounded:
    case HighsModelStatus::kUnboundedOrInfeasible:
      out.status = LpStatus::Unbounded;
      break;
    case HighsModelStatus::kTimeLimit:
      out.status = LpStatus::TimeLimit;
      out.time_limit_reached = true;
      out.message = "time limit reached";
      break;
    default:
      out.status = LpStatus::Error;
      out.message = "HiGHS model status: " + highs.modelStatusToString(ms);
      break;
  }
  if (st == HighsStatus::kError && out.status == LpStatus::Optimal) {
    out.status = LpStatus::Error;
    out.message = "HiGHS reported an error";
  }
  return out;
}

}  // namespace csynth::lp
