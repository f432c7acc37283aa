#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace csynth::geom {

/// Raised on malformed set data or mismatched dimensions.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/**
 * Zonotope Z(c, G) = { c + G z : ||z||_inf <= 1 }.
 *
 * G is n x p; p = 0 is allowed and encodes the singleton {c}. Values are
 * immutable once constructed.
 */
class Zonotope {
 public:
  Zonotope() = default;
  Zonotope(Eigen::VectorXd center, Eigen::MatrixXd generators);
  /// Singleton {center}.
  explicit Zonotope(Eigen::VectorXd center);

  [[nodiscard]] const Eigen::VectorXd& center() const { return center_; }
  [[nodiscard]] const Eigen::MatrixXd& generators() const { return generators_; }
  [[nodiscard]] int dim() const { return static_cast<int>(center_.size()); }
  [[nodiscard]] int num_generators() const { return static_cast<int>(generators_.cols()); }
  /// p / n; zero for the zero-dimensional set.
  [[nodiscard]] double order() const;

  /// Point for a given coordinate vector z (no bound check on z).
  [[nodiscard]] Eigen::VectorXd point(const Eigen::VectorXd& z) const;

  bool operator==(const Zonotope& other) const;

 private:
  Eigen::VectorXd center_;
  Eigen::MatrixXd generators_;
};

/// A Z + b.
Zonotope affine_map(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Zonotope& z);
/// Z1 (+) Z2: centers add, generators stack horizontally.
Zonotope minkowski_sum(const Zonotope& z1, const Zonotope& z2);
/// Column k of the generators is multiplied by alpha[k] >= 0.
Zonotope scale_generators(const Zonotope& z, const Eigen::VectorXd& alpha);

/// Interval hull: Z(c, Diag(r)) with r_i the absolute row sums of G.
Zonotope order_reduce_box(const Zonotope& z);

/// Boxing to a target order: keeps the (order - 1) * n generators with the
/// largest 1-norm minus inf-norm untouched and replaces the rest by their
/// interval hull. order >= 1; order 1 is order_reduce_box.
Zonotope reduce_order_box(const Zonotope& z, int order);

/// Indices of the generators kept unreduced by reduce_order_box, in their
/// original order. Empty when everything is boxed.
std::vector<int> boxing_kept_generators(const Eigen::MatrixXd& generators, int order);

}  // namespace csynth::geom
