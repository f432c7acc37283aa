#include "csynth/geom/zonotope.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace csynth::geom {

Zonotope::Zonotope(Eigen::VectorXd center, Eigen::MatrixXd generators)
    : center_(std::move(center)), generators_(std::move(generators)) {
  if (generators_.cols() == 0) generators_.resize(center_.size(), 0);
  if (generators_.rows() != center_.size())
    throw DimensionError("Zonotope: generator matrix has " + std::to_string(generators_.rows()) +
                         " rows but center has length " + std::to_string(center_.size()));
  if (!center_.allFinite() || !generators_.allFinite())
    throw DimensionError("Zonotope: non-finite entries");
}

Zonotope::Zonotope(Eigen::VectorXd center)
    : Zonotope(std::move(center), Eigen::MatrixXd()) {}

double Zonotope::order() const {
  return dim() == 0 ? 0.0 : static_cast<double>(num_generators()) / dim();
}

Eigen::VectorXd Zonotope::point(const Eigen::VectorXd& z) const {
  if (z.size() != num_generators()) throw DimensionError("Zonotope::point: coordinate length");
  return center_ + generators_ * z;
}

bool Zonotope::operator==(const Zonotope& other) const {
  return center_.size() == other.center_.size() &&
         generators_.cols() == other.generators_.cols() && center_ == other.center_ &&
         generators_ == other.generators_;
}

Zonotope affine_map(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Zonotope& z) {
  if (a.cols() != z.dim())
    throw DimensionError("affine_map: matrix has " + std::to_string(a.cols()) +
                         " columns, zonotope dimension is " + std::to_string(z.dim()));
  if (b.size() != a.rows()) throw DimensionError("affine_map: offset length mismatch");
  Eigen::MatrixXd g = a * z.generators();
  if (g.cols() == 0) g.resize(a.rows(), 0);
  return {a * z.center() + b, std::move(g)};
}

Zonotope minkowski_sum(const Zonotope& z1, const Zonotope& z2) {
  if (z1.dim() != z2.dim()) throw DimensionError("minkowski_sum: dimension mismatch");
  Eigen::MatrixXd g(z1.dim(), z1.num_generators() + z2.num_generators());
  g << z1.generators(), z2.generators();
  return {z1.center() + z2.center(), std::move(g)};
}

Zonotope scale_generators(const Zonotope& z, const Eigen::VectorXd& alpha) {
  if (alpha.size() != z.num_generators())
    throw DimensionError("scale_generators: alpha length " + std::to_string(alpha.size()) +
                         " vs " + std::to_string(z.num_generators()) + " generators");
  if ((alpha.array() < 0.0).any())
    throw std::invalid_argument("scale_generators: alpha must be nonnegative");
  return {z.center(), z.generators() * alpha.asDiagonal()};
}

Zonotope order_reduce_box(const Zonotope& z) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(z.dim());
  for (int i = 0; i < z.dim(); ++i)
    for (int k = 0; k < z.num_generators(); ++k) r(i) += std::abs(z.generators()(i, k));
  return {z.center(), Eigen::MatrixXd(r.asDiagonal())};
}

std::vector<int> boxing_kept_generators(const Eigen::MatrixXd& generators, int order) {
  if (order < 1) throw std::invalid_argument("reduce_order_box: order must be >= 1");
  const int n = static_cast<int>(generators.rows());
  const int p = static_cast<int>(generators.cols());
  std::vector<int> kept(static_cast<std::size_t>(p));
  std::iota(kept.begin(), kept.end(), 0);
  if (p <= order * n) return kept;
  const int keep = (order - 1) * n;
  std::vector<double> score(static_cast<std::size_t>(p));
  for (int k = 0; k < p; ++k)
    score[static_cast<std::size_t>(k)] =
        generators.col(k).lpNorm<1>() - generators.col(k).lpNorm<Eigen::Infinity>();
  std::stable_sort(kept.begin(), kept.end(), [&](int a, int b) {
    return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)];
  });
  kept.resize(static_cast<std::size_t>(keep));
  std::sort(kept.begin(), kept.end());
  return kept;
}

Zonotope reduce_order_box(const Zonotope& z, int order) {
  const int n = z.dim();
  const int p = z.num_generators();
  if (order == 1) return order_reduce_box(z);
  if (p <= order * n) return z;
  const std::vector<int> kept = boxing_kept_generators(z.generators(), order);
  std::vector<bool> is_kept(static_cast<std::size_t>(p), false);
  for (int k : kept) is_kept[static_cast<std::size_t>(k)] = true;
  Eigen::MatrixXd g(n, static_cast<Eigen::Index>(kept.size()) + n);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
  int col = 0;
  for (int k = 0; k < p; ++k) {
    if (is_kept[static_cast<std::size_t>(k)])
      g.col(col++) = z.generators().col(k);
    else
      r += z.generators().col(k).cwiseAbs();
  }
  g.rightCols(n) = r.asDiagonal();
  return {z.center(), std::move(g)};
}

}  // namespace csynth::geom
