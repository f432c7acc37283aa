#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "csynth/lp/expr.hpp"

namespace csynth::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, GreaterEqual, Equal };

/// Handle to a constraint row.
struct Constraint {
  int index = -1;
};

/// Block of variables laid out as a matrix (column-major).
class VarBlock {
 public:
  VarBlock() = default;
  VarBlock(int rows, int cols, int first) : rows_(rows), cols_(cols), first_(first) {}
  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }
  [[nodiscard]] Var operator()(int r, int c) const { return Var{first_ + c * rows_ + r}; }
  [[nodiscard]] ExprMatrix expr() const;
  [[nodiscard]] ExprVector column(int c) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  int first_ = 0;
};

struct Row {
  std::vector<Term> terms;  // merged, one entry per variable
  Sense sense;
  double rhs;
};

/// A minimization LP with named variables and constraints.
///
/// Names are the lookup keys used to read primal values and duals back out of
/// an LpSolution. Names must be unique within their kind.
class LinearProgram {
 public:
  Var add_variable(std::string name, double lower = 0.0, double upper = kInf);
  /// Adds rows*cols variables named "name[r,c]".
  VarBlock add_variables(const std::string& name, int rows, int cols, double lower = 0.0,
                         double upper = kInf);

  /// Adds lhs (sense) rhs; the constant part of lhs is moved to the right.
  Constraint add_constraint(std::string name, const LinExpr& lhs, Sense sense, double rhs = 0.0);

  void minimize(const LinExpr& objective);

  void set_bounds(Var v, double lower, double upper);

  [[nodiscard]] int num_variables() const { return static_cast<int>(var_names_.size()); }
  [[nodiscard]] int num_constraints() const { return static_cast<int>(rows_.size()); }

  [[nodiscard]] const std::string& variable_name(Var v) const { return var_names_.at(v.index); }
  [[nodiscard]] const std::string& constraint_name(Constraint c) const {
    return row_names_.at(c.index);
  }
  [[nodiscard]] std::optional<Var> find_variable(std::string_view name) const;
  [[nodiscard]] std::optional<Constraint> find_constraint(std::string_view name) const;

  [[nodiscard]] const std::vector<double>& lower_bounds() const { return lower_; }
  [[nodiscard]] const std::vector<double>& upper_bounds() const { return upper_; }
  [[nodiscard]] const std::vector<Row>& rows() const { return rows_; }
  [[nodiscard]] const std::vector<double>& objective() const { return objective_; }
  [[nodiscard]] double objective_offset() const { return objective_offset_; }

  /// CPLEX LP text format, for feeding the program to an external solver.
  [[nodiscard]] std::string to_lp_format() const;

 private:
  void check_var(int index) const;

  std::vector<std::string> var_names_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> objective_;
  double objective_offset_ = 0.0;
  std::vector<std::string> row_names_;
  std::vector<Row> rows_;
  std::unordered_map<std::string, int> var_index_;
  std::unordered_map<std::string, int> row_index_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, TimeLimit, Error };

const char* to_string(LpStatus s);

/// Raised when the backend fails numerically (not for infeasible/unbounded).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Result of solving a LinearProgram.
///
/// Dual convention (minimization): dual() returns the Lagrange multiplier of a
/// row, nonnegative for both <= and >= rows at optimality; sensitivity()
/// returns d(optimal value)/d(rhs), which equals dual() for >= and = rows and
/// -dual() for <= rows.
class LpSolution {
 public:
  LpStatus status = LpStatus::Error;
  double objective_value = 0.0;
  std::vector<double> primal;
  std::vector<double> row_sensitivity;  // d(opt)/d(rhs), per row
  std::vector<double> reduced_costs;
  double solve_seconds = 0.0;
  bool time_limit_reached = false;
  std::string message;

  [[nodiscard]] bool optimal() const { return status == LpStatus::Optimal; }
  [[nodiscard]] double value(Var v) const { return primal.at(static_cast<std::size_t>(v.index)); }
  [[nodiscard]] double value(const LinExpr& e) const { return e.evaluate(primal); }
  /// Primal values of a variable block as a matrix.
  [[nodiscard]] Eigen::MatrixXd values(const VarBlock& b) const;
  [[nodiscard]] double sensitivity(Constraint c) const {
    return row_sensitivity.at(static_cast<std::size_t>(c.index));
  }
  [[nodiscard]] double dual(const LinearProgram& lp, Constraint c) const;
  [[nodiscard]] double dual(const LinearProgram& lp, std::string_view name) const;
  [[nodiscard]] double value(const LinearProgram& lp, std::string_view name) const;
};

struct SolverOptions {
  double time_limit_seconds = kInf;
  double feasibility_tolerance = 1e-9;
  double optimality_tolerance = 1e-9;
  bool presolve = true;
};

LpSolution solve(const LinearProgram& lp, const SolverOptions& options = {});

/// KKT residuals of a solution, recomputed from the program data.
struct KktResiduals {
  double primal_infeasibility = 0.0;  // max bound or row violation
  double dual_infeasibility = 0.0;    // max sign violation of multipliers / reduced costs
  double stationarity = 0.0;          // max |c - A^T y - z|
  double complementarity = 0.0;       // max |slack * multiplier|
  double duality_gap = 0.0;           // |primal objective - dual objective|
  [[nodiscard]] double max() const;
};

KktResiduals check_kkt(const LinearProgram& lp, const LpSolution& sol);

}  // namespace csynth::lp
