#pragma once

#include <optional>
#include <string>
#include <vector>

#include "csynth/geom/zonotope.hpp"
#include "csynth/lp/linear_program.hpp"

namespace csynth::geom {

/// Residual tolerance used by every certificate check.
inline constexpr double kContainmentTolerance = 1e-7;

/// Witness (Gamma, gamma) for Z(c1, G1) subset of Z(c2, G2):
/// G1 = G2 Gamma, c2 - c1 = G2 gamma, each row of [Gamma, gamma] has absolute
/// sum at most 1 (or at most alpha_k in the weighted form).
struct ContainmentCertificate {
  Eigen::MatrixXd gamma_matrix;
  Eigen::VectorXd gamma_vector;
  bool feasible = false;
};

/// Zonotope whose center and generators are affine in LP variables.
struct ZonotopeExpr {
  lp::ExprVector center;
  lp::ExprMatrix generators;

  static ZonotopeExpr constant(const Zonotope& z);
  [[nodiscard]] int dim() const { return static_cast<int>(center.size()); }
  [[nodiscard]] Zonotope evaluate(const std::vector<double>& values) const;
};

/// Handles to the rows and split variables emitted by encode_containment.
struct ContainmentRows {
  lp::VarBlock gamma_pos;  // s x r' (r' = nonzero inner columns)
  lp::VarBlock gamma_neg;
  lp::VarBlock shift_pos;  // s x 1
  lp::VarBlock shift_neg;
  std::vector<int> inner_columns;          // inner generator column of each Gamma column
  std::vector<lp::Constraint> bound_rows;  // row k: |[Gamma, gamma]_k|_1 - bound_k <= 0
  std::vector<lp::Constraint> slack_rows;  // row i: |[E, e]_i|_1 - slack <= 0

  [[nodiscard]] ContainmentCertificate certificate(const lp::LpSolution& sol, int inner_cols) const;
};

/**
 * Emits the linear encoding of
 *   inner  subset of  Z(outer_center, outer_generators Diag(bound)) (+) Z(0, slack I)
 * with (Gamma, gamma) split into nonnegative parts so that absolute values stay
 * linear. `row_bounds` gives the right-hand side of each |row|_1 <= bound row
 * (constant 1 for the plain lemma, an alpha expression for the weighted one).
 * With a slack expression, a free slack block (E, e) absorbs the remainder and
 * its rows are bounded by the slack.
 *
 * Inner generator columns that are identically zero get no Gamma column.
 */
ContainmentRows encode_containment(lp::LinearProgram& lp, const std::string& tag,
                                   const ZonotopeExpr& inner, const lp::ExprVector& outer_center,
                                   const Eigen::MatrixXd& outer_generators,
                                   const std::vector<lp::LinExpr>& row_bounds,
                                   const std::optional<lp::LinExpr>& slack = std::nullopt);

/// Weighted containment Z1 subset of Z(c2, C2 Diag(alpha)): the alpha
/// expressions only appear on the right-hand side of the bound rows.
ContainmentRows weighted_containment_rows(lp::LinearProgram& lp, const std::string& tag,
                                          const Zonotope& inner, const Eigen::VectorXd& c2,
                                          const Eigen::MatrixXd& c2_generators,
                                          const std::vector<lp::LinExpr>& alpha);

/// Sufficient containment test Z1 subset of Z2 via the certificate LP.
/// Throws lp::SolverError on numerical failure.
ContainmentCertificate containment_lp(const Zonotope& z1, const Zonotope& z2);

/// True when `cert` satisfies the containment equations for (z1, z2) with
/// absolute residual tolerance `tol` and row bounds `bounds` (default 1).
bool verify_certificate(const Zonotope& z1, const Zonotope& z2, const ContainmentCertificate& cert,
                        const Eigen::VectorXd& bounds = Eigen::VectorXd(),
                        double tol = kContainmentTolerance);

/// Smallest d >= 0 with inner subset of outer (+) Z(0, d I) under the
/// certificate encoding (infinity-norm directed Hausdorff distance).
double directed_hausdorff(const Zonotope& outer, const Zonotope& inner);

}  // namespace csynth::geom
