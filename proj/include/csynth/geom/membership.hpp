#pragma once

#include <vector>

#include "csynth/geom/zonotope.hpp"

namespace csynth::geom {

struct Membership {
  bool inside = false;
  Eigen::VectorXd witness;  // z with ||z||_inf <= 1 and x = c + G z, when inside
};

/**
 * Point membership for one zonotope, solved as the feasibility problem
 *   find z in [-1, 1]^p with G z = x - c
 * by a dense bounded-variable primal simplex (phase one with artificials).
 *
 * The returned witness always satisfies the box exactly; the equality holds up
 * to `tolerance` (absolute, scaled by 1 + |x - c|_inf). A locator owns its
 * workspace, so reuse one instance per thread for repeated queries.
 */
class PointLocator {
 public:
  explicit PointLocator(const Zonotope& z, double tolerance = 1e-9);

  /// Writes a witness into `witness` (resized to p) and returns true when x
  /// lies in the zonotope.
  bool locate(const Eigen::VectorXd& x, Eigen::VectorXd& witness);

  [[nodiscard]] const Zonotope& zonotope() const { return zono_; }

 private:
  bool run_phase_one();
  void refactor();

  Zonotope zono_;
  double tol_;
  int n_;
  int p_;
  // Columns 0..p-1 are the shifted coordinates y = z + 1 in [0, 2]; columns
  // p..p+n-1 are artificials in [0, inf).
  Eigen::MatrixXd a_;
  Eigen::VectorXd upper_;
  Eigen::VectorXd value_;
  std::vector<int> basis_;
  std::vector<int> position_;  // basis row of a column, or -1
  Eigen::MatrixXd binv_;
  Eigen::VectorXd rhs_;
  Eigen::VectorXd dual_;
  Eigen::VectorXd direction_;
  Eigen::MatrixXd bmat_;
};

/// One-shot membership test; see PointLocator.
Membership contains_point(const Zonotope& z, const Eigen::VectorXd& x);

}  // namespace csynth::geom
