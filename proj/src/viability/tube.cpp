#include "csynth/viability/tube.hpp"

#include "csynth/geom/zonotope.hpp"

namespace csynth::viability {

using lp::ExprMatrix;
using lp::ExprVector;
using lp::LinExpr;
using lp::Sense;

TubeVars add_tube_variables(lp::LinearProgram& lp, const std::string& tag, int n, int m,
                            const std::vector<int>& state_cols, int input_steps) {
  TubeVars v;
  for (std::size_t t = 0; t < state_cols.size(); ++t) {
    const std::string s = "[" + std::to_string(t) + "]";
    v.xbar.push_back(lp.add_variables(tag + "xbar" + s, n, 1, -lp::kInf, lp::kInf));
    v.T.push_back(lp.add_variables(tag + "T" + s, n, state_cols[t], -lp::kInf, lp::kInf));
  }
  for (int t = 0; t < input_steps; ++t) {
    const std::string s = "[" + std::to_string(t) + "]";
    v.ubar.push_back(lp.add_variables(tag + "ubar" + s, m, 1, -lp::kInf, lp::kInf));
    v.M.push_back(lp.add_variables(tag + "M" + s, m, state_cols[static_cast<std::size_t>(t)], -lp::kInf, lp::kInf));
  }
  return v;
}

ViableSolution read_tube(const lp::LpSolution& sol, const TubeVars& vars, TubeMode mode, int k) {
  ViableSolution v;
  v.mode = mode;
  v.k = k;
  for (const auto& b : vars.xbar) v.xbar.push_back(sol.values(b).col(0));
  for (const auto& b : vars.T) v.T.push_back(sol.values(b));
  for (const auto& b : vars.ubar) v.ubar.push_back(sol.values(b).col(0));
  for (const auto& b : vars.M) v.M.push_back(sol.values(b));
  return v;
}

ExprMatrix tube_step(lp::LinearProgram& lp, const std::string& tag, const Eigen::MatrixXd& a,
                     const Eigen::MatrixXd& b, const ExprVector& xbar, const ExprMatrix& t_cur,
                     const ExprVector& ubar, const ExprMatrix& m_cur, const ExprVector& w_center,
                     const ExprMatrix& w_gens, const ExprVector& xbar_next, const ExprMatrix& t_next,
                     LeadBlock lead_kind) {
  const int n = static_cast<int>(a.rows());
  if (t_cur.cols() != m_cur.cols() && b.cols() > 0)
    throw geom::DimensionError("tube_step(" + tag + "): T and M column counts differ");
  ExprMatrix lhs = lp::multiply(a, t_cur);
  if (b.cols() > 0) lhs = lp::add(lhs, lp::multiply(b, m_cur));
  const ExprMatrix full = w_gens.cols() > 0 ? lhs.hstack(w_gens) : lhs;
  const int p = w_gens.cols();
  const int lead = lead_kind == LeadBlock::None ? 0 : p;
  if (full.cols() != lead + t_next.cols())
    throw geom::DimensionError("tube_step(" + tag + "): expected " + std::to_string(full.cols() - lead) +
                               " next-step columns, got " + std::to_string(t_next.cols()));

  for (int c = 0; c < full.cols(); ++c) {
    for (int i = 0; i < n; ++i) {
      LinExpr row = full(i, c);
      if (c >= lead) row -= t_next(i, c - lead);
      else if (lead_kind == LeadBlock::Free) continue;
      // constant nonzero rows are kept: they make the program infeasible
      if (row.is_zero()) continue;
      lp.add_constraint(tag + "/col[" + std::to_string(i) + "," + std::to_string(c) + "]", row, Sense::Equal);
    }
  }
  ExprVector center = lp::multiply(a, xbar);
  if (b.cols() > 0) center = lp::add(center, lp::multiply(b, ubar));
  for (int i = 0; i < n; ++i) {
    LinExpr row = center[static_cast<std::size_t>(i)] + w_center[static_cast<std::size_t>(i)] -
                  xbar_next[static_cast<std::size_t>(i)];
    lp.add_constraint(tag + "/ctr[" + std::to_string(i) + "]", row, Sense::Equal);
  }
  if (lead_kind == LeadBlock::None) return {};
  return full.middle_cols(0, lead);
}

LinExpr add_abs_sum(lp::LinearProgram& lp, const std::string& tag, const ExprMatrix& e) {
  LinExpr total;
  for (int c = 0; c < e.cols(); ++c) {
    for (int r = 0; r < e.rows(); ++r) {
      const LinExpr& v = e(r, c);
      if (v.is_constant()) {
        total += std::abs(v.constant());
        continue;
      }
      const std::string s = "[" + std::to_string(r) + "," + std::to_string(c) + "]";
      const lp::Var a = lp.add_variable(tag + s);
      lp.add_constraint(tag + "+" + s, v - LinExpr(a), Sense::LessEqual);
      lp.add_constraint(tag + "-" + s, -v - LinExpr(a), Sense::LessEqual);
      total.add(a, 1.0);
    }
  }
  return total;
}

}  // namespace csynth::viability
