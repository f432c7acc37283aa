#include "csynth/viability/viability.hpp"

#include <cmath>

#include "csynth/geom/containment.hpp"
#include "csynth/viability/tube.hpp"

namespace csynth::viability {

using geom::ZonotopeExpr;
using lp::ExprMatrix;
using lp::ExprVector;
using lp::LinExpr;

const char* to_string(TubeMode m) {
  switch (m) {
    case TubeMode::Growing: return "growing";
    case TubeMode::FixedK: return "fixed-k";
    case TubeMode::Invariant: return "invariant";
  }
  return "?";
}

TubeMode tube_mode_from_string(const std::string& s) {
  if (s == "growing") return TubeMode::Growing;
  if (s == "fixed-k") return TubeMode::FixedK;
  if (s == "invariant") return TubeMode::Invariant;
  throw std::invalid_argument("unknown tube mode \"" + s + "\"");
}

Zonotope ViableSolution::omega(int t) const {
  const std::size_t k = invariant() ? 0 : static_cast<std::size_t>(t);
  return {xbar.at(k), T.at(k)};
}

Zonotope ViableSolution::theta(int t) const {
  const std::size_t k = invariant() ? 0 : static_cast<std::size_t>(t);
  return {ubar.at(k), M.at(k)};
}

Zonotope RciSolution::omega() const { return {xbar, T / (1.0 - beta)}; }
Zonotope RciSolution::theta() const { return {ubar, M / (1.0 - beta)}; }

ViableSolution RciSolution::as_viable() const {
  ViableSolution v;
  v.mode = TubeMode::Invariant;
  v.k = static_cast<int>(T.cols());
  v.beta = beta;
  v.xbar = {xbar};
  v.T = {T / (1.0 - beta)};
  v.ubar = {ubar};
  v.M = {M / (1.0 - beta)};
  return v;
}

void FiniteProblem::validate() const {
  const std::size_t h = A.size();
  if (h < 1) throw geom::DimensionError("finite problem needs horizon >= 1");
  if (B.size() != h || W.size() != h || U.size() != h || X.size() != h + 1)
    throw geom::DimensionError("finite problem: per-step data has inconsistent lengths");
  const auto n = A[0].rows();
  for (std::size_t t = 0; t < h; ++t) {
    if (A[t].rows() != n || A[t].cols() != n || B[t].rows() != n || W[t].dim() != n ||
        U[t].dim() != B[t].cols())
      throw geom::DimensionError("finite problem: dimension mismatch at t=" + std::to_string(t));
  }
  for (const auto& x : X)
    if (x.dim() != n) throw geom::DimensionError("finite problem: X has wrong dimension");
  if (initial && initial->dim() != n) throw geom::DimensionError("finite problem: initial set has wrong dimension");
}

void InvariantProblem::validate() const {
  const auto n = A.rows();
  if (A.cols() != n || B.rows() != n || W.dim() != n || X.dim() != n || U.dim() != B.cols())
    throw geom::DimensionError("invariant problem: dimension mismatch");
}

std::vector<int> tube_columns(TubeMode mode, int k, const std::vector<int>& disturbance_cols) {
  std::vector<int> cols{k};
  for (int p : disturbance_cols) cols.push_back(mode == TubeMode::Growing ? cols.back() + p : k);
  return cols;
}

namespace {

std::vector<LinExpr> ones(int s) { return std::vector<LinExpr>(static_cast<std::size_t>(s), LinExpr(1.0)); }

}  // namespace

Outcome<ViableSolution> finite_viable(const FiniteProblem& problem, int k, TubeMode mode,
                                      const lp::SolverOptions& solver) {
  problem.validate();
  if (mode == TubeMode::Invariant) throw std::invalid_argument("finite_viable: use rci for invariant sets");
  if (problem.initial) k = problem.initial->num_generators();
  if (k < 1 && !problem.initial) throw std::invalid_argument("finite_viable: k must be >= 1");
  const int h = problem.horizon();
  const int n = static_cast<int>(problem.A[0].rows());
  const int m = static_cast<int>(problem.B[0].cols());

  std::vector<int> pcols;
  for (const auto& w : problem.W) pcols.push_back(w.num_generators());
  const std::vector<int> cols = tube_columns(mode, k, pcols);

  lp::LinearProgram prog;
  const TubeVars tube = add_tube_variables(prog, "", n, m, cols, h);
  const LeadBlock lead = mode == TubeMode::Growing ? LeadBlock::None : LeadBlock::Zero;
  for (int t = 0; t < h; ++t) {
    const auto st = static_cast<std::size_t>(t);
    tube_step(prog, "dyn[" + std::to_string(t) + "]", problem.A[st], problem.B[st], tube.xbar_expr(st),
              tube.T_expr(st), tube.ubar_expr(st), tube.M_expr(st), lp::constant_vector(problem.W[st].center()),
              ExprMatrix::constant(problem.W[st].generators()), tube.xbar_expr(st + 1), tube.T_expr(st + 1), lead);
  }
  if (problem.initial) {
    for (int i = 0; i < n; ++i) {
      prog.add_constraint("init/c[" + std::to_string(i) + "]", LinExpr(tube.xbar[0](i, 0)), lp::Sense::Equal,
                          problem.initial->center()(i));
      for (int c = 0; c < k; ++c)
        prog.add_constraint("init/T[" + std::to_string(i) + "," + std::to_string(c) + "]", LinExpr(tube.T[0](i, c)),
                            lp::Sense::Equal, problem.initial->generators()(i, c));
    }
  }
  LinExpr objective;
  for (int t = 0; t <= h; ++t) {
    const auto st = static_cast<std::size_t>(t);
    const Zonotope& x = problem.X[st];
    geom::encode_containment(prog, "X[" + std::to_string(t) + "]", {tube.xbar_expr(st), tube.T_expr(st)},
                             lp::constant_vector(x.center()), x.generators(), ones(x.num_generators()));
    if (t < h) {
      const Zonotope& u = problem.U[st];
      geom::encode_containment(prog, "U[" + std::to_string(t) + "]", {tube.ubar_expr(st), tube.M_expr(st)},
                               lp::constant_vector(u.center()), u.generators(), ones(u.num_generators()));
    }
    objective += add_abs_sum(prog, "absT[" + std::to_string(t) + "]", tube.T_expr(st));
  }
  prog.minimize(objective);
  const lp::LpSolution sol = lp::solve(prog, solver);
  Outcome<ViableSolution> out;
  out.status = sol.status;
  out.solve_seconds = sol.solve_seconds;
  out.k = k;
  if (sol.status == lp::LpStatus::Error) throw lp::SolverError("finite_viable: " + sol.message);
  if (!sol.optimal()) return out;
  ViableSolution v = read_tube(sol, tube, mode, k);
  out.solution = std::move(v);
  return out;
}

Outcome<RciSolution> rci(const InvariantProblem& problem, int k, double beta, bool simplified,
                         const lp::SolverOptions& solver) {
  problem.validate();
  if (k < 1) throw std::invalid_argument("rci: k must be >= 1");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("rci: beta must lie in [0, 1)");
  if (simplified && beta != 0.0) throw std::invalid_argument("rci: the simplified form requires beta = 0");
  const int n = static_cast<int>(problem.A.rows());
  const int m = static_cast<int>(problem.B.cols());
  const double scale = 1.0 / (1.0 - beta);

  lp::LinearProgram prog;
  const TubeVars tube = add_tube_variables(prog, "", n, m, {k}, 1);
  const ExprVector xbar = tube.xbar_expr(0);
  const ExprMatrix t_expr = tube.T_expr(0);
  const ExprMatrix e = tube_step(prog, "dyn", problem.A, problem.B, xbar, t_expr, tube.ubar_expr(0), tube.M_expr(0),
                                 lp::constant_vector(problem.W.center()),
                                 ExprMatrix::constant(problem.W.generators()), xbar, t_expr,
                                 simplified ? LeadBlock::Zero : LeadBlock::Free);
  if (!simplified && e.cols() > 0) {
    geom::encode_containment(prog, "E", {ExprVector(static_cast<std::size_t>(n), LinExpr(0.0)), e},
                             ExprVector(static_cast<std::size_t>(n), LinExpr(0.0)), beta * problem.W.generators(),
                             ones(problem.W.num_generators()));
  }
  ExprMatrix t_scaled = t_expr;
  ExprMatrix m_scaled = tube.M_expr(0);
  for (int c = 0; c < k; ++c) {
    for (int r = 0; r < n; ++r) t_scaled(r, c) *= scale;
    for (int r = 0; r < m; ++r) m_scaled(r, c) *= scale;
  }
  geom::encode_containment(prog, "X", {xbar, t_scaled}, lp::constant_vector(problem.X.center()),
                           problem.X.generators(), ones(problem.X.num_generators()));
  geom::encode_containment(prog, "U", {tube.ubar_expr(0), m_scaled}, lp::constant_vector(problem.U.center()),
                           problem.U.generators(), ones(problem.U.num_generators()));
  prog.minimize(add_abs_sum(prog, "absT", t_expr));

  const lp::LpSolution sol = lp::solve(prog, solver);
  Outcome<RciSolution> out;
  out.status = sol.status;
  out.solve_seconds = sol.solve_seconds;
  out.k = k;
  if (sol.status == lp::LpStatus::Error) throw lp::SolverError("rci: " + sol.message);
  if (!sol.optimal()) return out;
  RciSolution r;
  r.xbar = sol.values(tube.xbar[0]).col(0);
  r.T = sol.values(tube.T[0]);
  r.ubar = sol.values(tube.ubar[0]).col(0);
  r.M = sol.values(tube.M[0]);
  r.beta = beta;
  r.E = e.cols() > 0 ? e.evaluate(sol.primal) : Eigen::MatrixXd::Zero(n, problem.W.num_generators());
  out.solution = std::move(r);
  return out;
}

Outcome<RciSolution> rci_beta_search(const InvariantProblem& problem, int k, const lp::SolverOptions& solver) {
  Outcome<RciSolution> last;
  double total = 0.0;
  for (int b = 0; b <= 9; ++b) {
    last = rci(problem, k, 0.1 * b, false, solver);
    total += last.solve_seconds;
    if (last.feasible()) break;
  }
  last.solve_seconds = total;
  return last;
}

Outcome<RciSolution> rci_auto_k(const InvariantProblem& problem, bool simplified, int cap_factor,
                                const lp::SolverOptions& solver) {
  const int n = static_cast<int>(problem.A.rows());
  Outcome<RciSolution> last;
  double total = 0.0;
  for (int k = n; k <= cap_factor * n; k *= 2) {
    last = simplified ? rci(problem, k, 0.0, true, solver) : rci_beta_search(problem, k, solver);
    total += last.solve_seconds;
    if (last.feasible()) break;
  }
  last.solve_seconds = total;
  return last;
}

Outcome<ViableSolution> finite_viable_auto_k(const FiniteProblem& problem, TubeMode mode, int cap_factor,
                                             const lp::SolverOptions& solver) {
  const int n = static_cast<int>(problem.A.at(0).rows());
  Outcome<ViableSolution> last;
  double total = 0.0;
  for (int k = n; k <= cap_factor * n; k *= 2) {
    last = finite_viable(problem, k, mode, solver);
    total += last.solve_seconds;
    if (last.feasible() || problem.initial) break;
  }
  last.solve_seconds = total;
  return last;
}

// ---------------------------------------------------------------- controller

Eigen::VectorXd extract_controller(const ViableSolution& sol, int t, const Eigen::VectorXd& x) {
  const geom::Membership mem = geom::contains_point(sol.omega(t), x);
  if (!mem.inside) throw OutOfSetError("state outside the viable set at t=" + std::to_string(t));
  const std::size_t k = sol.invariant() ? 0 : static_cast<std::size_t>(t);
  return sol.ubar.at(k) + sol.M.at(k) * mem.witness;
}

Eigen::VectorXd extract_controller(const RciSolution& sol, const Eigen::VectorXd& x) {
  return extract_controller(sol.as_viable(), 0, x);
}

Controller::Controller(const ViableSolution& sol) : sol_(sol) {
  const int steps = sol.invariant() ? 1 : sol.horizon();
  for (int t = 0; t < steps; ++t) locators_.emplace_back(sol.omega(t), 1e-9);
}

bool Controller::control(int t, const Eigen::VectorXd& x, Eigen::VectorXd& u) {
  const std::size_t k = sol_.invariant() ? 0 : static_cast<std::size_t>(t);
  if (k >= locators_.size()) throw std::out_of_range("Controller::control: step beyond horizon");
  if (!locators_[k].locate(x, witness_)) return false;
  u = sol_.ubar[k] + sol_.M[k] * witness_;
  return true;
}

// ---------------------------------------------------------------- checks

bool certify_guarantees(const ViableSolution& sol, const std::vector<Zonotope>& X, const std::vector<Zonotope>& U) {
  const int states = sol.invariant() ? 1 : static_cast<int>(sol.T.size());
  for (int t = 0; t < states; ++t)
    if (!geom::containment_lp(sol.omega(t), X.at(static_cast<std::size_t>(t))).feasible) return false;
  const int inputs = sol.invariant() ? 1 : sol.horizon();
  for (int t = 0; t < inputs; ++t) {
    const Zonotope th = sol.theta(t);
    if (th.dim() == 0) continue;
    if (!geom::containment_lp(th, U.at(static_cast<std::size_t>(t))).feasible) return false;
  }
  return true;
}

double tube_residual(const ViableSolution& sol, const std::vector<Eigen::MatrixXd>& A,
                     const std::vector<Eigen::MatrixXd>& B, const std::vector<Zonotope>& W) {
  double worst = 0.0;
  const int steps = sol.invariant() ? 1 : sol.horizon();
  for (int t = 0; t < steps; ++t) {
    const auto st = static_cast<std::size_t>(t);
    const std::size_t nx = sol.invariant() ? 0 : st + 1;
    const double scale = sol.invariant() ? 1.0 / (1.0 - sol.beta) : 1.0;
    Eigen::MatrixXd lhs(A[st].rows(), sol.T[st].cols() + W[st].num_generators());
    lhs << A[st] * sol.T[st] + B[st] * sol.M[st], scale * W[st].generators();
    const Eigen::MatrixXd& next = sol.T[nx];
    const auto lead = lhs.cols() - next.cols();
    if (lead < 0) return lp::kInf;
    if (sol.mode == TubeMode::Growing && lead != 0) return lp::kInf;
    if (lead > 0 && sol.beta == 0.0) worst = std::max(worst, lhs.leftCols(lead).cwiseAbs().maxCoeff());
    if (next.size() > 0) worst = std::max(worst, (lhs.rightCols(next.cols()) - next).cwiseAbs().maxCoeff());
    const Eigen::VectorXd c = A[st] * sol.xbar[st] + B[st] * sol.ubar[st] + W[st].center() - sol.xbar[nx];
    if (c.size() > 0) worst = std::max(worst, c.cwiseAbs().maxCoeff());
  }
  return worst;
}

// ---------------------------------------------------------------- JSON

io::Json solution_to_json(const ViableSolution& sol) {
  io::Json j;
  j["mode"] = to_string(sol.mode);
  j["k"] = sol.k;
  j["beta"] = sol.beta;
  io::Json steps = io::Json::array();
  for (std::size_t t = 0; t < sol.T.size(); ++t) {
    io::Json s;
    s["t"] = t;
    s["xbar"] = io::vector_to_json(sol.xbar[t]);
    s["T"] = io::matrix_to_json(sol.T[t]);
    if (t < sol.ubar.size()) {
      s["ubar"] = io::vector_to_json(sol.ubar[t]);
      s["M"] = io::matrix_to_json(sol.M[t]);
    }
    steps.push_back(std::move(s));
  }
  j["steps"] = std::move(steps);
  return j;
}

ViableSolution solution_from_json(const io::Json& j) {
  ViableSolution sol;
  sol.mode = tube_mode_from_string(j.at("mode").get<std::string>());
  sol.k = j.at("k").get<int>();
  sol.beta = j.value("beta", 0.0);
  for (const auto& s : j.at("steps")) {
    sol.xbar.push_back(io::vector_from_json(s.at("xbar"), "xbar"));
    const auto n = static_cast<int>(sol.xbar.back().size());
    sol.T.push_back(io::matrix_from_json(s.at("T"), "T", n));
    if (s.contains("ubar")) {
      sol.ubar.push_back(io::vector_from_json(s.at("ubar"), "ubar"));
      sol.M.push_back(io::matrix_from_json(s.at("M"), "M", static_cast<int>(sol.ubar.back().size())));
    }
  }
  return sol;
}

}  // namespace csynth::viability
