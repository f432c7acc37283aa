#include "csynth/geom/containment.hpp"

#include <cmath>

namespace csynth::geom {

using lp::LinExpr;
using lp::Sense;

ZonotopeExpr ZonotopeExpr::constant(const Zonotope& z) {
  return {lp::constant_vector(z.center()), lp::ExprMatrix::constant(z.generators())};
}

Zonotope ZonotopeExpr::evaluate(const std::vector<double>& values) const {
  Eigen::MatrixXd g = generators.evaluate(values);
  if (g.cols() == 0) g.resize(dim(), 0);
  return {lp::evaluate(center, values), std::move(g)};
}

ContainmentCertificate ContainmentRows::certificate(const lp::LpSolution& sol,
                                                    int inner_cols) const {
  ContainmentCertificate cert;
  const int s = gamma_pos.rows();
  cert.gamma_matrix = Eigen::MatrixXd::Zero(s, inner_cols);
  cert.gamma_vector = Eigen::VectorXd::Zero(s);
  if (!sol.optimal()) return cert;
  cert.feasible = true;
  for (std::size_t j = 0; j < inner_columns.size(); ++j)
    for (int k = 0; k < s; ++k)
      cert.gamma_matrix(k, inner_columns[j]) =
          sol.value(gamma_pos(k, static_cast<int>(j))) - sol.value(gamma_neg(k, static_cast<int>(j)));
  for (int k = 0; k < s; ++k)
    cert.gamma_vector(k) = sol.value(shift_pos(k, 0)) - sol.value(shift_neg(k, 0));
  return cert;
}

ContainmentRows encode_containment(lp::LinearProgram& lp, const std::string& tag,
                                   const ZonotopeExpr& inner, const lp::ExprVector& outer_center,
                                   const Eigen::MatrixXd& outer_generators,
                                   const std::vector<LinExpr>& row_bounds,
                                   const std::optional<LinExpr>& slack) {
  const int n = inner.dim();
  const int s = static_cast<int>(outer_generators.cols());
  if (static_cast<int>(outer_center.size()) != n || (s > 0 && outer_generators.rows() != n) ||
      (inner.generators.cols() > 0 && inner.generators.rows() != n))
    throw DimensionError("encode_containment(" + tag + "): dimension mismatch");
  if (static_cast<int>(row_bounds.size()) != s)
    throw DimensionError("encode_containment(" + tag + "): one bound per outer generator required");

  ContainmentRows out;
  for (int j = 0; j < inner.generators.cols(); ++j)
    if (!inner.generators.column_is_zero(j)) out.inner_columns.push_back(j);
  const int r = static_cast<int>(out.inner_columns.size());

  out.gamma_pos = lp.add_variables(tag + "/G+", s, r);
  out.gamma_neg = lp.add_variables(tag + "/G-", s, r);
  out.shift_pos = lp.add_variables(tag + "/g+", s, 1);
  out.shift_neg = lp.add_variables(tag + "/g-", s, 1);

  lp::VarBlock e_pos, e_neg, f_pos, f_neg;
  if (slack) {
    e_pos = lp.add_variables(tag + "/E+", n, r);
    e_neg = lp.add_variables(tag + "/E-", n, r);
    f_pos = lp.add_variables(tag + "/e+", n, 1);
    f_neg = lp.add_variables(tag + "/e-", n, 1);
  }

  // G1 = G2 Gamma (+ E)
  for (int jj = 0; jj < r; ++jj) {
    const int j = out.inner_columns[static_cast<std::size_t>(jj)];
    for (int i = 0; i < n; ++i) {
      LinExpr row = inner.generators(i, j);
      for (int k = 0; k < s; ++k) {
        const double g = outer_generators(i, k);
        if (g == 0.0) continue;
        row.add(out.gamma_pos(k, jj), -g);
        row.add(out.gamma_neg(k, jj), g);
      }
      if (slack) {
        row.add(e_pos(i, jj), -1.0);
        row.add(e_neg(i, jj), 1.0);
      }
      lp.add_constraint(tag + "/gen[" + std::to_string(i) + "," + std::to_string(j) + "]", row,
                        Sense::Equal, 0.0);
    }
  }
  // c2 - c1 = G2 gamma (+ e)
  for (int i = 0; i < n; ++i) {
    LinExpr row = outer_center[static_cast<std::size_t>(i)] - inner.center[static_cast<std::size_t>(i)];
    for (int k = 0; k < s; ++k) {
      const double g = outer_generators(i, k);
      if (g == 0.0) continue;
      row.add(out.shift_pos(k, 0), -g);
      row.add(out.shift_neg(k, 0), g);
    }
    if (slack) {
      row.add(f_pos(i, 0), -1.0);
      row.add(f_neg(i, 0), 1.0);
    }
    lp.add_constraint(tag + "/ctr[" + std::to_string(i) + "]", row, Sense::Equal, 0.0);
  }
  // |[Gamma, gamma]_k|_1 <= bound_k
  out.bound_rows.reserve(static_cast<std::size_t>(s));
  for (int k = 0; k < s; ++k) {
    LinExpr row;
    for (int jj = 0; jj < r; ++jj) {
      row.add(out.gamma_pos(k, jj), 1.0);
      row.add(out.gamma_neg(k, jj), 1.0);
    }
    row.add(out.shift_pos(k, 0), 1.0);
    row.add(out.shift_neg(k, 0), 1.0);
    row -= row_bounds[static_cast<std::size_t>(k)];
    out.bound_rows.push_back(
        lp.add_constraint(tag + "/w[" + std::to_string(k) + "]", row, Sense::LessEqual, 0.0));
  }
  if (slack) {
    for (int i = 0; i < n; ++i) {
      LinExpr row;
      for (int jj = 0; jj < r; ++jj) {
        row.add(e_pos(i, jj), 1.0);
        row.add(e_neg(i, jj), 1.0);
      }
      row.add(f_pos(i, 0), 1.0);
      row.add(f_neg(i, 0), 1.0);
      row -= *slack;
      out.slack_rows.push_back(
          lp.add_constraint(tag + "/d[" + std::to_string(i) + "]", row, Sense::LessEqual, 0.0));
    }
  }
  return out;
}

ContainmentRows weighted_containment_rows(lp::LinearProgram& lp, const std::string& tag,
                                          const Zonotope& inner, const Eigen::VectorXd& c2,
                                          const Eigen::MatrixXd& c2_generators,
                                          const std::vector<LinExpr>& alpha) {
  if (inner.dim() != c2.size() || c2_generators.rows() != c2.size())
    throw DimensionError("weighted_containment_rows: dimension mismatch");
  return encode_containment(lp, tag, ZonotopeExpr::constant(inner), lp::constant_vector(c2),
                            c2_generators, alpha);
}

namespace {

void throw_on_error(const lp::LpSolution& sol, const char* what) {
  if (sol.status == lp::LpStatus::Error)
    throw lp::SolverError(std::string(what) + ": LP solver failure: " + sol.message);
}

}  // namespace

ContainmentCertificate containment_lp(const Zonotope& z1, const Zonotope& z2) {
  if (z1.dim() != z2.dim()) throw DimensionError("containment_lp: dimension mismatch");
  lp::LinearProgram prog;
  const std::vector<LinExpr> ones(static_cast<std::size_t>(z2.num_generators()), LinExpr(1.0));
  ContainmentRows rows = encode_containment(prog, "c", ZonotopeExpr::constant(z1),
                                            lp::constant_vector(z2.center()), z2.generators(), ones);
  LinExpr objective;
  for (int k = 0; k < rows.gamma_pos.rows(); ++k) {
    for (int j = 0; j < rows.gamma_pos.cols(); ++j)
      objective.add(rows.gamma_pos(k, j), 1.0).add(rows.gamma_neg(k, j), 1.0);
    objective.add(rows.shift_pos(k, 0), 1.0).add(rows.shift_neg(k, 0), 1.0);
  }
  prog.minimize(objective);
  const lp::LpSolution sol = lp::solve(prog);
  throw_on_error(sol, "containment_lp");
  ContainmentCertificate cert = rows.certificate(sol, z1.num_generators());
  if (cert.feasible && !verify_certificate(z1, z2, cert)) cert.feasible = false;
  return cert;
}

bool verify_certificate(const Zonotope& z1, const Zonotope& z2, const ContainmentCertificate& cert,
                        const Eigen::VectorXd& bounds, double tol) {
  if (!cert.feasible) return false;
  const int s = z2.num_generators();
  if (cert.gamma_matrix.rows() != s || cert.gamma_matrix.cols() != z1.num_generators() ||
      cert.gamma_vector.size() != s)
    return false;
  const Eigen::VectorXd b = bounds.size() == 0 ? Eigen::VectorXd::Ones(s) : bounds;
  if (z1.num_generators() > 0 &&
      (z1.generators() - z2.generators() * cert.gamma_matrix).cwiseAbs().maxCoeff() > tol)
    return false;
  const Eigen::VectorXd shift = z2.center() - z1.center() - z2.generators() * cert.gamma_vector;
  if (shift.size() > 0 && shift.cwiseAbs().maxCoeff() > tol) return false;
  for (int k = 0; k < s; ++k) {
    const double row = cert.gamma_matrix.row(k).cwiseAbs().sum() + std::abs(cert.gamma_vector(k));
    if (row > b(k) + tol) return false;
  }
  return true;
}

double directed_hausdorff(const Zonotope& outer, const Zonotope& inner) {
  if (outer.dim() != inner.dim()) throw DimensionError("directed_hausdorff: dimension mismatch");
  lp::LinearProgram prog;
  const lp::Var d = prog.add_variable("d", 0.0);
  const std::vector<LinExpr> ones(static_cast<std::size_t>(outer.num_generators()), LinExpr(1.0));
  encode_containment(prog, "h", ZonotopeExpr::constant(inner), lp::constant_vector(outer.center()),
                     outer.generators(), ones, LinExpr(d));
  prog.minimize(LinExpr(d));
  const lp::LpSolution sol = lp::solve(prog);
  throw_on_error(sol, "directed_hausdorff");
  if (!sol.optimal())
    throw lp::SolverError(std::string("directed_hausdorff: unexpected LP status ") +
                          lp::to_string(sol.status));
  return std::max(0.0, sol.value(d));
}

}  // namespace csynth::geom
