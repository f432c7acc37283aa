#pragma once

#include <string>
#include <vector>

#include "csynth/lp/linear_program.hpp"
#include "csynth/viability/viability.hpp"

namespace csynth::viability {

/// LP variables of a tube of zonotopes Z(xbar(t), T(t)) with input sets
/// Z(ubar(t), M(t)). T has one entry per state step, M one per input step.
struct TubeVars {
  std::vector<lp::VarBlock> xbar;  // n x 1
  std::vector<lp::VarBlock> T;     // n x l(t)
  std::vector<lp::VarBlock> ubar;  // m x 1
  std::vector<lp::VarBlock> M;     // m x l(t)

  [[nodiscard]] lp::ExprVector xbar_expr(std::size_t t) const { return xbar.at(t).column(0); }
  [[nodiscard]] lp::ExprMatrix T_expr(std::size_t t) const { return T.at(t).expr(); }
  [[nodiscard]] lp::ExprVector ubar_expr(std::size_t t) const { return ubar.at(t).column(0); }
  [[nodiscard]] lp::ExprMatrix M_expr(std::size_t t) const { return M.at(t).expr(); }
};

/// Adds free tube variables. `state_cols[t]` is the column count of T(t);
/// inputs exist for t < input_steps and use state_cols[t] columns.
TubeVars add_tube_variables(lp::LinearProgram& lp, const std::string& tag, int n, int m,
                            const std::vector<int>& state_cols, int input_steps);

/// Reads the tube values out of a solved program. Invariant tubes are stored
/// as solved (no 1/(1-beta) factor).
ViableSolution read_tube(const lp::LpSolution& sol, const TubeVars& vars, TubeMode mode, int k);

/// What happens to the leading columns of [A T + B M, W] in tube_step.
enum class LeadBlock {
  None,  // all columns equal T_next (growing tube)
  Zero,  // leading W-width block is zero, the rest equals T_next
  Free,  // leading block is returned to the caller (E of the invariant LP)
};

/**
 * Emits [A T + B M, W] = [lead, T_next] column by column and
 * A xbar + B ubar + w_center = xbar_next. `lead` has as many columns as W
 * unless `lead_kind` is None. Returns the leading block as expressions
 * (empty for None).
 */
lp::ExprMatrix tube_step(lp::LinearProgram& lp, const std::string& tag, const Eigen::MatrixXd& a,
                         const Eigen::MatrixXd& b, const lp::ExprVector& xbar,
                         const lp::ExprMatrix& t_cur, const lp::ExprVector& ubar,
                         const lp::ExprMatrix& m_cur, const lp::ExprVector& w_center,
                         const lp::ExprMatrix& w_gens, const lp::ExprVector& xbar_next,
                         const lp::ExprMatrix& t_next, LeadBlock lead_kind);

/// Sum of absolute values of the given expressions, linearised with one
/// auxiliary variable and two rows per entry.
lp::LinExpr add_abs_sum(lp::LinearProgram& lp, const std::string& tag, const lp::ExprMatrix& e);

}  // namespace csynth::viability
