#pragma once
// Independent reference computations used by the tests. Nothing here calls
// the LP layer or the containment encodings.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "csynth/geom/zonotope.hpp"

namespace oracle {

using csynth::geom::Zonotope;

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = u(rng);
  return m;
}

inline Eigen::VectorXd random_zeta(std::mt19937_64& rng, int p) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd z(p);
  for (int k = 0; k < p; ++k) z(k) = u(rng);
  return z;
}

inline Zonotope random_zonotope(std::mt19937_64& rng, int n, int p, double scale = 1.0) {
  return {random_matrix(rng, n, 1, scale).col(0), random_matrix(rng, n, p, scale)};
}

/// Minimum of c.x over {x : A x <= b} by enumerating basic solutions.
/// Returns nullopt when no vertex is feasible.
inline std::optional<double> lp_vertex_enumeration(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                                   const Eigen::VectorXd& c, double tol = 1e-9) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  std::optional<double> best;
  std::vector<int> pick(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) pick[static_cast<std::size_t>(k)] = k;
  if (n > m) return best;
  while (true) {
    Eigen::MatrixXd sub(n, n);
    Eigen::VectorXd rhs(n);
    for (int k = 0; k < n; ++k) {
      sub.row(k) = a.row(pick[static_cast<std::size_t>(k)]);
      rhs(k) = b(pick[static_cast<std::size_t>(k)]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (lu.rank() == n) {
      const Eigen::VectorXd x = lu.solve(rhs);
      if (((a * x - b).array() <= tol).all()) {
        const double v = c.dot(x);
        if (!best || v < *best) best = v;
      }
    }
    int k = n - 1;
    while (k >= 0 && pick[static_cast<std::size_t>(k)] == m - n + k) --k;
    if (k < 0) break;
    ++pick[static_cast<std::size_t>(k)];
    for (int q = k + 1; q < n; ++q) pick[static_cast<std::size_t>(q)] = pick[static_cast<std::size_t>(q - 1)] + 1;
  }
  return best;
}

/// Exact membership in a 2-D zonotope through its facet normals.
inline bool zonogon_contains(const Zonotope& z, const Eigen::Vector2d& x, double tol = 1e-9) {
  const Eigen::Vector2d r = x - z.center();
  const Eigen::MatrixXd& g = z.generators();
  bool any = false;
  for (int k = 0; k < g.cols(); ++k) {
    const Eigen::Vector2d n(-g(1, k), g(0, k));
    if (n.norm() < 1e-14) continue;
    any = true;
    double support = 0.0;
    for (int j = 0; j < g.cols(); ++j) support += std::abs(n.dot(g.col(j)));
    if (std::abs(n.dot(r)) > support + tol * (1.0 + n.norm())) return false;
  }
  if (!any) return r.norm() <= tol;
  // degenerate (all generators parallel): the normal test is one-sided
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  if (lu.rank() < 2) {
    Eigen::Vector2d dir = Eigen::Vector2d::Zero();
    for (int j = 0; j < g.cols(); ++j)
      if (g.col(j).norm() > 1e-14) {
        dir = g.col(j).normalized();
        break;
      }
    double reach = 0.0;
    for (int j = 0; j < g.cols(); ++j) reach += std::abs(dir.dot(g.col(j)));
    return std::abs(dir.dot(r)) <= reach + tol;
  }
  return true;
}

/// Infinity-norm distance from x to a 2-D zonotope, by bisection on the
/// inflation radius.
inline double zonogon_distance(const Zonotope& z, const Eigen::Vector2d& x) {
  if (zonogon_contains(z, x, 1e-12)) return 0.0;
  double lo = 0.0;
  double hi = (x - z.center()).cwiseAbs().maxCoeff() + 1.0;
  Eigen::MatrixXd g(2, z.num_generators() + 2);
  g.leftCols(z.num_generators()) = z.generators();
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    g.rightCols(2) = mid * Eigen::Matrix2d::Identity();
    if (zonogon_contains(Zonotope(z.center(), g), x, 1e-13))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

/// Grid over the generator coordinates of `inner`; each axis takes `grid`
/// points including both ends, so every vertex is visited.
template <class F>
void for_each_grid_point(const Zonotope& inner, int grid, F&& f) {
  const int p = inner.num_generators();
  std::vector<int> idx(static_cast<std::size_t>(p), 0);
  Eigen::VectorXd z(p);
  while (true) {
    for (int k = 0; k < p; ++k)
      z(k) = grid == 1 ? 0.0 : -1.0 + 2.0 * idx[static_cast<std::size_t>(k)] / (grid - 1);
    f(inner.point(z));
    int k = 0;
    while (k < p && ++idx[static_cast<std::size_t>(k)] == grid) idx[static_cast<std::size_t>(k++)] = 0;
    if (k == p) break;
  }
}

/// Grid-sampled directed Hausdorff distance sup_{x in inner} dist(x, outer).
inline double hausdorff_grid(const Zonotope& outer, const Zonotope& inner, int grid) {
  double best = 0.0;
  if (outer.dim() == 1) {
    const double c = outer.center()(0);
    const double r = outer.generators().cwiseAbs().sum();
    for_each_grid_point(inner, grid, [&](const Eigen::VectorXd& x) {
      best = std::max(best, std::max(0.0, std::abs(x(0) - c) - r));
    });
    return best;
  }
  for_each_grid_point(inner, grid, [&](const Eigen::VectorXd& x) {
    best = std::max(best, zonogon_distance(outer, Eigen::Vector2d(x(0), x(1))));
  });
  return best;
}

/// Zonogon area: 4 * sum_{j<k} |det[g_j g_k]|.
inline double zonogon_area(const Eigen::MatrixXd& g) {
  double a = 0.0;
  for (int j = 0; j < g.cols(); ++j)
    for (int k = j + 1; k < g.cols(); ++k) a += std::abs(g(0, j) * g(1, k) - g(1, j) * g(0, k));
  return 4.0 * a;
}

}  // namespace oracle
