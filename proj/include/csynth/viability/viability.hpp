#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csynth/geom/membership.hpp"
#include "csynth/geom/zonotope.hpp"
#include "csynth/io/json.hpp"
#include "csynth/lp/linear_program.hpp"

namespace csynth::viability {

using geom::Zonotope;

enum class TubeMode {
  Growing,    // T(t+1) = [A T + B M, G^d]
  FixedK,     // [A T + B M, G^d] = [0, T(t+1)]
  Invariant,  // single set, [A T + B M, G^d] = [E, T]
};

const char* to_string(TubeMode m);
TubeMode tube_mode_from_string(const std::string& s);

/**
 * Viable tube Omega(t) = Z(xbar(t), T(t)) with controller
 * u = ubar(t) + M(t) zeta for x = xbar(t) + T(t) zeta.
 *
 * Invariant solutions store a single entry of each; omega(t) then returns the
 * same set for every t. For invariant sets computed with beta > 0 the stored
 * T and M already include the 1 / (1 - beta) factor.
 */
struct ViableSolution {
  TubeMode mode = TubeMode::Growing;
  int k = 0;
  double beta = 0.0;
  std::vector<Eigen::VectorXd> xbar;
  std::vector<Eigen::MatrixXd> T;
  std::vector<Eigen::VectorXd> ubar;
  std::vector<Eigen::MatrixXd> M;

  [[nodiscard]] bool invariant() const { return mode == TubeMode::Invariant; }
  /// Number of controlled steps (1 for invariant sets).
  [[nodiscard]] int horizon() const { return static_cast<int>(ubar.size()); }
  [[nodiscard]] Zonotope omega(int t) const;
  [[nodiscard]] Zonotope theta(int t) const;
};

/// Invariant-set LP solution in its raw form.
struct RciSolution {
  Eigen::VectorXd xbar;
  Eigen::MatrixXd T;
  Eigen::VectorXd ubar;
  Eigen::MatrixXd M;
  double beta = 0.0;
  Eigen::MatrixXd E;

  /// Z(xbar, T / (1 - beta)).
  [[nodiscard]] Zonotope omega() const;
  /// Z(ubar, M / (1 - beta)).
  [[nodiscard]] Zonotope theta() const;
  [[nodiscard]] ViableSolution as_viable() const;
};

/// Status plus optional solution; infeasibility is a result, not an error.
template <class S>
struct Outcome {
  lp::LpStatus status = lp::LpStatus::Error;
  std::optional<S> solution;
  double solve_seconds = 0.0;
  int k = 0;
  [[nodiscard]] bool feasible() const { return solution.has_value(); }
};

/// Finite-horizon problem for x(t+1) = A(t) x + B(t) u + w, w in W(t).
struct FiniteProblem {
  std::vector<Eigen::MatrixXd> A;  // h entries
  std::vector<Eigen::MatrixXd> B;  // h entries
  std::vector<Zonotope> W;         // h entries
  std::vector<Zonotope> X;         // h + 1 entries
  std::vector<Zonotope> U;         // h entries
  std::optional<Zonotope> initial;  // pins Omega(0) when set (k = its generator count)

  [[nodiscard]] int horizon() const { return static_cast<int>(A.size()); }
  void validate() const;
};

/// Time-invariant problem for the invariant-set LP.
struct InvariantProblem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Zonotope W;
  Zonotope X;
  Zonotope U;
  void validate() const;
};

/// Column counts l(t), t = 0..h: growing adds the disturbance width each step.
std::vector<int> tube_columns(TubeMode mode, int k, const std::vector<int>& disturbance_cols);

/// Finite-horizon viable tube minimising the sum of |T(t)| entries.
/// mode must be Growing or FixedK.
Outcome<ViableSolution> finite_viable(const FiniteProblem& problem, int k, TubeMode mode,
                                      const lp::SolverOptions& solver = {});

/// Invariant set for a fixed beta in [0, 1). `simplified` forces E = 0 and
/// beta = 0.
Outcome<RciSolution> rci(const InvariantProblem& problem, int k, double beta, bool simplified,
                         const lp::SolverOptions& solver = {});

/// Tries beta = 0, 0.1, ..., 0.9 (general form) and returns the first
/// feasible one.
Outcome<RciSolution> rci_beta_search(const InvariantProblem& problem, int k,
                                     const lp::SolverOptions& solver = {});

/// k = n, 2n, 4n, ... up to cap_factor * n; first feasible result.
Outcome<RciSolution> rci_auto_k(const InvariantProblem& problem, bool simplified, int cap_factor = 8,
                                const lp::SolverOptions& solver = {});
Outcome<ViableSolution> finite_viable_auto_k(const FiniteProblem& problem, TubeMode mode,
                                             int cap_factor = 8, const lp::SolverOptions& solver = {});

/// Raised when the controller is queried outside its viable set.
class OutOfSetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// u = ubar(t) + M(t) zeta with zeta a witness of x in Omega(t).
Eigen::VectorXd extract_controller(const ViableSolution& sol, int t, const Eigen::VectorXd& x);
Eigen::VectorXd extract_controller(const RciSolution& sol, const Eigen::VectorXd& x);

/// Reusable controller with one point locator per step.
class Controller {
 public:
  explicit Controller(const ViableSolution& sol);
  /// Returns false (and leaves u untouched) when x is outside Omega(t).
  bool control(int t, const Eigen::VectorXd& x, Eigen::VectorXd& u);
  [[nodiscard]] const ViableSolution& solution() const { return sol_; }

 private:
  ViableSolution sol_;
  std::vector<geom::PointLocator> locators_;
  Eigen::VectorXd witness_;
};

/// Omega(t) in X(t) for every state step and Theta(t) in U(t) for every input
/// step, via the containment LP. Invariant solutions use X[0], U[0].
bool certify_guarantees(const ViableSolution& sol, const std::vector<Zonotope>& X,
                        const std::vector<Zonotope>& U);

/// Largest residual of the tube equations for the given dynamics.
double tube_residual(const ViableSolution& sol, const std::vector<Eigen::MatrixXd>& A,
                     const std::vector<Eigen::MatrixXd>& B, const std::vector<Zonotope>& W);

io::Json solution_to_json(const ViableSolution& sol);
ViableSolution solution_from_json(const io::Json& j);

}  // namespace csynth::viability
