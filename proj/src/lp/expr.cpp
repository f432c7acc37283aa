#include "csynth/lp/expr.hpp"

#include <stdexcept>

namespace csynth::lp {

ExprMatrix ExprMatrix::constant(const Eigen::MatrixXd& m) {
  ExprMatrix e(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int c = 0; c < e.cols(); ++c)
    for (int r = 0; r < e.rows(); ++r) e(r, c) = LinExpr(m(r, c));
  return e;
}

ExprMatrix ExprMatrix::middle_cols(int first, int count) const {
  if (first < 0 || count < 0 || first + count > cols_)
    throw std::out_of_range("ExprMatrix::middle_cols: column range out of bounds");
  ExprMatrix out(rows_, count);
  for (int c = 0; c < count; ++c)
    for (int r = 0; r < rows_; ++r) out(r, c) = (*this)(r, first + c);
  return out;
}

ExprMatrix ExprMatrix::hstack(const ExprMatrix& other) const {
  if (cols_ > 0 && other.cols_ > 0 && rows_ != other.rows_)
    throw std::invalid_argument("ExprMatrix::hstack: row count mismatch");
  const int rows = cols_ > 0 ? rows_ : other.rows_;
  ExprMatrix out(rows, cols_ + other.cols_);
  for (int c = 0; c < cols_; ++c)
    for (int r = 0; r < rows; ++r) out(r, c) = (*this)(r, c);
  for (int c = 0; c < other.cols_; ++c)
    for (int r = 0; r < rows; ++r) out(r, cols_ + c) = other(r, c);
  return out;
}

bool ExprMatrix::column_is_zero(int c) const {
  for (int r = 0; r < rows_; ++r)
    if (!(*this)(r, c).is_zero()) return false;
  return true;
}

Eigen::MatrixXd ExprMatrix::evaluate(const std::vector<double>& values) const {
  Eigen::MatrixXd m(rows_, cols_);
  for (int c = 0; c < cols_; ++c)
    for (int r = 0; r < rows_; ++r) m(r, c) = (*this)(r, c).evaluate(values);
  return m;
}

ExprVector constant_vector(const Eigen::VectorXd& v) {
  ExprVector out;
  out.reserve(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out.emplace_back(v(i));
  return out;
}

Eigen::VectorXd evaluate(const ExprVector& v, const std::vector<double>& values) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i].evaluate(values);
  return out;
}

ExprMatrix multiply(const Eigen::MatrixXd& m, const ExprMatrix& e) {
  if (m.cols() != e.rows()) throw std::invalid_argument("multiply: inner dimension mismatch");
  ExprMatrix out(static_cast<int>(m.rows()), e.cols());
  for (int c = 0; c < e.cols(); ++c)
    for (int r = 0; r < out.rows(); ++r) {
      LinExpr acc;
      for (int k = 0; k < e.rows(); ++k) acc.add(e(k, c), m(r, k));
      out(r, c) = std::move(acc);
    }
  return out;
}

ExprVector multiply(const Eigen::MatrixXd& m, const ExprVector& e) {
  if (m.cols() != static_cast<Eigen::Index>(e.size()))
    throw std::invalid_argument("multiply: inner dimension mismatch");
  ExprVector out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (std::size_t k = 0; k < e.size(); ++k) out[static_cast<std::size_t>(r)].add(e[k], m(r, static_cast<Eigen::Index>(k)));
  return out;
}

ExprMatrix add(const ExprMatrix& a, const ExprMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("add: shape mismatch");
  ExprMatrix out = a;
  for (int c = 0; c < a.cols(); ++c)
    for (int r = 0; r < a.rows(); ++r) out(r, c) += b(r, c);
  return out;
}

ExprVector add(const ExprVector& a, const ExprVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("add: length mismatch");
  ExprVector out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += b[i];
  return out;
}

}  // namespace csynth::lp
