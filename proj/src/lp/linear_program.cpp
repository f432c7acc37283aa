#include "csynth/lp/linear_program.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace csynth::lp {

ExprMatrix VarBlock::expr() const {
  ExprMatrix e(rows_, cols_);
  for (int c = 0; c < cols_; ++c)
    for (int r = 0; r < rows_; ++r) e(r, c) = LinExpr((*this)(r, c));
  return e;
}

ExprVector VarBlock::column(int c) const {
  ExprVector v;
  v.reserve(static_cast<std::size_t>(rows_));
  for (int r = 0; r < rows_; ++r) v.emplace_back((*this)(r, c));
  return v;
}

Var LinearProgram::add_variable(std::string name, double lower, double upper) {
  if (std::isnan(lower) || std::isnan(upper) || lower > upper)
    throw std::invalid_argument("add_variable: invalid bounds for " + name);
  const int index = num_variables();
  if (!var_index_.emplace(name, index).second)
    throw std::invalid_argument("add_variable: duplicate name " + name);
  var_names_.push_back(std::move(name));
  lower_.push_back(lower);
  upper_.push_back(upper);
  objective_.push_back(0.0);
  return Var{index};
}

VarBlock LinearProgram::add_variables(const std::string& name, int rows, int cols, double lower,
                                      double upper) {
  const int first = num_variables();
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r)
      add_variable(name + "[" + std::to_string(r) + "," + std::to_string(c) + "]", lower, upper);
  return VarBlock(rows, cols, first);
}

void LinearProgram::check_var(int index) const {
  if (index < 0 || index >= num_variables())
    throw std::invalid_argument("LinearProgram: expression references an undeclared variable");
}

namespace {

std::vector<Term> merge_terms(const LinExpr& e) {
  std::vector<Term> terms = e.terms();
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  merged.reserve(terms.size());
  for (const Term& t : terms) {
    if (!merged.empty() && merged.back().var == t.var)
      merged.back().coef += t.coef;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  return merged;
}

}  // namespace

Constraint LinearProgram::add_constraint(std::string name, const LinExpr& lhs, Sense sense,
                                         double rhs) {
  for (const Term& t : lhs.terms()) {
    check_var(t.var);
    if (!std::isfinite(t.coef))
      throw std::invalid_argument("add_constraint: non-finite coefficient in " + name);
  }
  const double adjusted = rhs - lhs.constant();
  if (!std::isfinite(adjusted))
    throw std::invalid_argument("add_constraint: non-finite right-hand side in " + name);
  const int index = num_constraints();
  if (!row_index_.emplace(name, index).second)
    throw std::invalid_argument("add_constraint: duplicate name " + name);
  row_names_.push_back(std::move(name));
  rows_.push_back(Row{merge_terms(lhs), sense, adjusted});
  return Constraint{index};
}

void LinearProgram::minimize(const LinExpr& objective) {
  std::fill(objective_.begin(), objective_.end(), 0.0);
  for (const Term& t : objective.terms()) {
    check_var(t.var);
    objective_[static_cast<std::size_t>(t.var)] += t.coef;
  }
  objective_offset_ = objective.constant();
}

void LinearProgram::set_bounds(Var v, double lower, double upper) {
  check_var(v.index);
  if (lower > upper) throw std::invalid_argument("set_bounds: lower > upper");
  lower_[static_cast<std::size_t>(v.index)] = lower;
  upper_[static_cast<std::size_t>(v.index)] = upper;
}

std::optional<Var> LinearProgram::find_variable(std::string_view name) const {
  auto it = var_index_.find(std::string(name));
  if (it == var_index_.end()) return std::nullopt;
  return Var{it->second};
}

std::optional<Constraint> LinearProgram::find_constraint(std::string_view name) const {
  auto it = row_index_.find(std::string(name));
  if (it == row_index_.end()) return std::nullopt;
  return Constraint{it->second};
}

namespace {

// LP-format identifiers cannot contain brackets, commas or slashes.
std::string lp_identifier(const std::string& name) {
  std::string out = name;
  for (char& ch : out)
    if (ch == '[' || ch == ']' || ch == ',' || ch == '/' || ch == ' ' || ch == ':') ch = '_';
  return out;
}

void write_terms(std::ostringstream& os, const std::vector<Term>& terms,
                 const std::vector<std::string>& names) {
  if (terms.empty()) {
    os << " 0 " << lp_identifier(names.empty() ? std::string("x") : names.front());
    return;
  }
  for (const Term& t : terms) {
    os << (t.coef < 0 ? " - " : " + ") << std::abs(t.coef) << " "
       << lp_identifier(names[static_cast<std::size_t>(t.var)]);
  }
}

}  // namespace

std::string LinearProgram::to_lp_format() const {
  std::ostringstream os;
  os.precision(17);
  os << "Minimize\n obj:";
  std::vector<Term> obj;
  for (int j = 0; j < num_variables(); ++j)
    if (objective_[static_cast<std::size_t>(j)] != 0.0)
      obj.push_back({j, objective_[static_cast<std::size_t>(j)]});
  write_terms(os, obj, var_names_);
  os << "\nSubject To\n";
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    os << " " << lp_identifier(row_names_[r]) << ":";
    write_terms(os, rows_[r].terms, var_names_);
    switch (rows_[r].sense) {
      case Sense::LessEqual: os << " <= "; break;
      case Sense::GreaterEqual: os << " >= "; break;
      case Sense::Equal: os << " = "; break;
    }
    os << rows_[r].rhs << "\n";
  }
  os << "Bounds\n";
  for (int j = 0; j < num_variables(); ++j) {
    const double lo = lower_[static_cast<std::size_t>(j)];
    const double hi = upper_[static_cast<std::size_t>(j)];
    const std::string id = lp_identifier(var_names_[static_cast<std::size_t>(j)]);
    if (std::isinf(lo) && std::isinf(hi)) {
      os << " " << id << " free\n";
    } else {
      os << " ";
      if (std::isinf(lo)) os << "-inf"; else os << lo;
      os << " <= " << id << " <= ";
      if (std::isinf(hi)) os << "+inf"; else os << hi;
      os << "\n";
    }
  }
  os << "End\n";
  return os.str();
}

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::TimeLimit: return "time limit";
    case LpStatus::Error: return "error";
  }
  return "error";
}

Eigen::MatrixXd LpSolution::values(const VarBlock& b) const {
  Eigen::MatrixXd m(b.rows(), b.cols());
  for (int c = 0; c < b.cols(); ++c)
    for (int r = 0; r < b.rows(); ++r) m(r, c) = value(b(r, c));
  return m;
}

double LpSolution::dual(const LinearProgram& lp, Constraint c) const {
  const double s = sensitivity(c);
  return lp.rows().at(static_cast<std::size_t>(c.index)).sense == Sense::LessEqual ? -s : s;
}

double LpSolution::dual(const LinearProgram& lp, std::string_view name) const {
  auto c = lp.find_constraint(name);
  if (!c) throw std::out_of_range("LpSolution::dual: unknown constraint " + std::string(name));
  return dual(lp, *c);
}

double LpSolution::value(const LinearProgram& lp, std::string_view name) const {
  auto v = lp.find_variable(name);
  if (!v) throw std::out_of_range("LpSolution::value: unknown variable " + std::string(name));
  return value(*v);
}

double KktResiduals::max() const {
  return std::max({primal_infeasibility, dual_infeasibility, stationarity, complementarity,
                   duality_gap});
}

KktResiduals check_kkt(const LinearProgram& lp, const LpSolution& sol) {
  KktResiduals res;
  if (!sol.optimal()) return res;
  const auto n = static_cast<std::size_t>(lp.num_variables());
  const auto& lo = lp.lower_bounds();
  const auto& hi = lp.upper_bounds();
  const auto& x = sol.primal;

  // stationarity: c - sum_r s_r a_r - z = 0 with z the reduced costs
  std::vector<double> grad(lp.objective());
  double dual_obj = lp.objective_offset();
  for (std::size_t r = 0; r < lp.rows().size(); ++r) {
    const Row& row = lp.rows()[r];
    const double s = sol.row_sensitivity[r];
    double activity = 0.0;
    for (const Term& t : row.terms) {
      activity += t.coef * x[static_cast<std::size_t>(t.var)];
      grad[static_cast<std::size_t>(t.var)] -= s * t.coef;
    }
    const double slack = activity - row.rhs;
    double viol = 0.0;
    double sign_viol = 0.0;
    switch (row.sense) {
      case Sense::LessEqual:
        viol = std::max(0.0, slack);
        sign_viol = std::max(0.0, s);
        break;
      case Sense::GreaterEqual:
        viol = std::max(0.0, -slack);
        sign_viol = std::max(0.0, -s);
        break;
      case Sense::Equal: viol = std::abs(slack); break;
    }
    res.primal_infeasibility = std::max(res.primal_infeasibility, viol);
    res.dual_infeasibility = std::max(res.dual_infeasibility, sign_viol);
    if (row.sense != Sense::Equal)
      res.complementarity = std::max(res.complementarity, std::abs(slack * s));
    dual_obj += s * row.rhs;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double z = grad[j];  // implied reduced cost
    res.primal_infeasibility =
        std::max({res.primal_infeasibility, lo[j] - x[j], x[j] - hi[j], 0.0});
    // z > 0 must sit at a finite lower bound, z < 0 at a finite upper bound
    if (z > 0.0) {
      if (std::isinf(lo[j])) res.dual_infeasibility = std::max(res.dual_infeasibility, z);
      else {
        res.complementarity = std::max(res.complementarity, std::abs(z * (x[j] - lo[j])));
        dual_obj += z * lo[j];
      }
    } else if (z < 0.0) {
      if (std::isinf(hi[j])) res.dual_infeasibility = std::max(res.dual_infeasibility, -z);
      else {
        res.complementarity = std::max(res.complementarity, std::abs(z * (x[j] - hi[j])));
        dual_obj += z * hi[j];
      }
    }
    if (!sol.reduced_costs.empty())
      res.stationarity = std::max(res.stationarity, std::abs(z - sol.reduced_costs[j]));
  }
  res.duality_gap = std::abs(sol.objective_value - dual_obj);
  return res;
}

}  // namespace csynth::lp
