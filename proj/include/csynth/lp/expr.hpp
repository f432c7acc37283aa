#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace csynth::lp {

/// Handle to a variable of a LinearProgram.
struct Var {
  int index = -1;
};

struct Term {
  int var;
  double coef;
};

/// Affine expression: sum of coef * var plus a constant.
/// Terms are kept unsorted and may repeat; LinearProgram merges them when a
/// constraint is added.
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double constant) : constant_(constant) {}  // NOLINT(google-explicit-constructor)
  LinExpr(Var v) { terms_.push_back({v.index, 1.0}); }  // NOLINT(google-explicit-constructor)
  LinExpr(Var v, double coef) { terms_.push_back({v.index, coef}); }

  LinExpr& add(Var v, double coef) {
    if (coef != 0.0) terms_.push_back({v.index, coef});
    return *this;
  }
  LinExpr& add(const LinExpr& other, double scale) {
    if (scale == 0.0) return *this;
    constant_ += scale * other.constant_;
    for (const Term& t : other.terms_) terms_.push_back({t.var, scale * t.coef});
    return *this;
  }

  LinExpr& operator+=(const LinExpr& o) { return add(o, 1.0); }
  LinExpr& operator-=(const LinExpr& o) { return add(o, -1.0); }
  LinExpr& operator+=(double c) {
    constant_ += c;
    return *this;
  }
  LinExpr& operator-=(double c) {
    constant_ -= c;
    return *this;
  }
  LinExpr& operator*=(double s) {
    constant_ *= s;
    for (Term& t : terms_) t.coef *= s;
    if (s == 0.0) terms_.clear();
    return *this;
  }

  [[nodiscard]] double constant() const { return constant_; }
  [[nodiscard]] const std::vector<Term>& terms() const { return terms_; }
  /// True when the expression has no variable terms.
  [[nodiscard]] bool is_constant() const { return terms_.empty(); }
  /// True for the literal constant zero (no terms, zero offset).
  [[nodiscard]] bool is_zero() const { return terms_.empty() && constant_ == 0.0; }

  /// Evaluates the expression at a primal point indexed by variable.
  [[nodiscard]] double evaluate(const std::vector<double>& values) const {
    double v = constant_;
    for (const Term& t : terms_) v += t.coef * values[static_cast<std::size_t>(t.var)];
    return v;
  }

 private:
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

inline LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
inline LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
inline LinExpr operator*(double s, LinExpr a) { return a *= s; }
inline LinExpr operator*(LinExpr a, double s) { return a *= s; }
inline LinExpr operator-(LinExpr a) { return a *= -1.0; }

/// Dense matrix of affine expressions (column-major storage).
class ExprMatrix {
 public:
  ExprMatrix() = default;
  ExprMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols) {}

  /// Embeds a constant matrix.
  static ExprMatrix constant(const Eigen::MatrixXd& m);

  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }

  LinExpr& operator()(int r, int c) { return data_[idx(r, c)]; }
  [[nodiscard]] const LinExpr& operator()(int r, int c) const { return data_[idx(r, c)]; }

  /// Columns [first, first + count).
  [[nodiscard]] ExprMatrix middle_cols(int first, int count) const;
  /// Horizontal concatenation [*this, other]; row counts must match.
  [[nodiscard]] ExprMatrix hstack(const ExprMatrix& other) const;
  /// True when every entry of column c is the literal zero.
  [[nodiscard]] bool column_is_zero(int c) const;

  [[nodiscard]] Eigen::MatrixXd evaluate(const std::vector<double>& values) const;

 private:
  [[nodiscard]] std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(c) * rows_ + r;
  }
  int rows_ = 0;
  int cols_ = 0;
  std::vector<LinExpr> data_;
};

/// Column vector of affine expressions.
using ExprVector = std::vector<LinExpr>;

ExprVector constant_vector(const Eigen::VectorXd& v);
Eigen::VectorXd evaluate(const ExprVector& v, const std::vector<double>& values);

/// M * E for a constant matrix M.
ExprMatrix multiply(const Eigen::MatrixXd& m, const ExprMatrix& e);
ExprVector multiply(const Eigen::MatrixXd& m, const ExprVector& e);
ExprMatrix add(const ExprMatrix& a, const ExprMatrix& b);
ExprVector add(const ExprVector& a, const ExprVector& b);

}  // namespace csynth::lp
