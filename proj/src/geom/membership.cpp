#include "csynth/geom/membership.hpp"

#include <cmath>
#include <limits>

namespace csynth::geom {

namespace {
constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-12;
constexpr double kInfBound = std::numeric_limits<double>::infinity();
}  // namespace

PointLocator::PointLocator(const Zonotope& z, double tolerance)
    : zono_(z),
      tol_(tolerance),
      n_(z.dim()),
      p_(z.num_generators()),
      a_(n_, p_ + n_),
      upper_(p_ + n_),
      value_(p_ + n_),
      basis_(static_cast<std::size_t>(n_)),
      position_(static_cast<std::size_t>(p_ + n_)),
      binv_(n_, n_),
      rhs_(n_),
      dual_(n_),
      direction_(n_),
      bmat_(n_, n_) {
  a_.leftCols(p_) = z.generators();
  a_.rightCols(n_).setZero();
  upper_.head(p_).setConstant(2.0);
  upper_.tail(n_).setConstant(kInfBound);
}

void PointLocator::refactor() {
  for (int i = 0; i < n_; ++i) bmat_.col(i) = a_.col(basis_[static_cast<std::size_t>(i)]);
  binv_ = bmat_.partialPivLu().inverse();
  // Recompute basic values from the nonbasic ones.
  Eigen::VectorXd resid = rhs_;
  for (int j = 0; j < p_ + n_; ++j)
    if (position_[static_cast<std::size_t>(j)] < 0 && value_(j) != 0.0) resid -= value_(j) * a_.col(j);
  const Eigen::VectorXd xb = binv_ * resid;
  for (int i = 0; i < n_; ++i) value_(basis_[static_cast<std::size_t>(i)]) = xb(i);
}

bool PointLocator::run_phase_one() {
  const int total = p_ + n_;
  const int max_iter = 50 * total + 200;
  int stall = 0;
  double last_obj = std::numeric_limits<double>::infinity();
  int pivots_since_refactor = 0;

  for (int iter = 0; iter < max_iter; ++iter) {
    // duals of the phase-one cost (1 on artificials)
    dual_.setZero();
    for (int i = 0; i < n_; ++i)
      if (basis_[static_cast<std::size_t>(i)] >= p_) dual_ += binv_.row(i).transpose();

    const bool bland = stall > 2 * total;
    int entering = -1;
    double best = 0.0;
    int dir = 0;
    for (int j = 0; j < p_; ++j) {
      if (position_[static_cast<std::size_t>(j)] >= 0) continue;
      const double d = -dual_.dot(a_.col(j));
      const bool at_lower = value_(j) <= 0.0;
      if (at_lower && d < -kCostTol && (bland ? entering < 0 : -d > best)) {
        entering = j;
        best = -d;
        dir = 1;
      } else if (!at_lower && d > kCostTol && (bland ? entering < 0 : d > best)) {
        entering = j;
        best = d;
        dir = -1;
      }
    }
    if (entering < 0) return true;

    direction_.noalias() = binv_ * a_.col(entering);
    double theta = upper_(entering);
    int leave_row = -1;
    double leave_size = 0.0;
    for (int i = 0; i < n_; ++i) {
      const int b = basis_[static_cast<std::size_t>(i)];
      const double delta = dir * direction_(i);
      double limit = kInfBound;
      if (delta > kPivotTol)
        limit = std::max(0.0, value_(b)) / delta;
      else if (delta < -kPivotTol && std::isfinite(upper_(b)))
        limit = std::max(0.0, upper_(b) - value_(b)) / -delta;
      else
        continue;
      if (limit < theta - 1e-14 || (limit <= theta + 1e-14 && std::abs(delta) > leave_size)) {
        theta = limit;
        leave_row = i;
        leave_size = std::abs(delta);
      }
    }
    if (!std::isfinite(theta)) return false;  // cannot happen: phase one is bounded

    for (int i = 0; i < n_; ++i) value_(basis_[static_cast<std::size_t>(i)]) -= dir * theta * direction_(i);
    value_(entering) += dir * theta;

    if (leave_row < 0) {
      // bound flip
      value_(entering) = dir > 0 ? upper_(entering) : 0.0;
    } else {
      const int leaving = basis_[static_cast<std::size_t>(leave_row)];
      const double delta = dir * direction_(leave_row);
      value_(leaving) = delta > 0 ? 0.0 : upper_(leaving);
      position_[static_cast<std::size_t>(leaving)] = -1;
      basis_[static_cast<std::size_t>(leave_row)] = entering;
      position_[static_cast<std::size_t>(entering)] = leave_row;
      // eta update of the basis inverse
      const double piv = direction_(leave_row);
      binv_.row(leave_row) /= piv;
      for (int i = 0; i < n_; ++i)
        if (i != leave_row && direction_(i) != 0.0) binv_.row(i) -= direction_(i) * binv_.row(leave_row);
      if (++pivots_since_refactor >= 40) {
        refactor();
        pivots_since_refactor = 0;
      }
    }

    double obj = 0.0;
    for (int j = p_; j < total; ++j) obj += std::max(0.0, value_(j));
    if (obj < last_obj - 1e-15) {
      last_obj = obj;
      stall = 0;
    } else {
      ++stall;
    }
    if (obj == 0.0) return true;
  }
  return false;
}

bool PointLocator::locate(const Eigen::VectorXd& x, Eigen::VectorXd& witness) {
  if (x.size() != n_) throw DimensionError("PointLocator::locate: point dimension mismatch");
  witness.setZero(p_);
  const Eigen::VectorXd r = x - zono_.center();
  const double scale = 1.0 + (n_ > 0 ? r.cwiseAbs().maxCoeff() : 0.0);
  if (n_ == 0) return true;

  // y = z + 1 starts at its lower bound 0, so the artificials carry b = r + G 1.
  rhs_ = r + zono_.generators().rowwise().sum();
  for (int i = 0; i < n_; ++i) {
    const double s = rhs_(i) >= 0.0 ? 1.0 : -1.0;
    a_.col(p_ + i).setZero();
    a_(i, p_ + i) = s;
  }
  value_.setZero();
  for (int j = 0; j < p_ + n_; ++j) position_[static_cast<std::size_t>(j)] = -1;
  binv_.setZero();
  for (int i = 0; i < n_; ++i) {
    basis_[static_cast<std::size_t>(i)] = p_ + i;
    position_[static_cast<std::size_t>(p_ + i)] = i;
    value_(p_ + i) = std::abs(rhs_(i));
    binv_(i, i) = a_(i, p_ + i);
  }

  run_phase_one();

  for (int j = 0; j < p_; ++j) witness(j) = std::clamp(value_(j) - 1.0, -1.0, 1.0);
  const Eigen::VectorXd resid = zono_.generators() * witness - r;
  return resid.cwiseAbs().maxCoeff() <= tol_ * scale;
}

Membership contains_point(const Zonotope& z, const Eigen::VectorXd& x) {
  PointLocator locator(z);
  Membership m;
  m.inside = locator.locate(x, m.witness);
  return m;
}

}  // namespace csynth::geom
