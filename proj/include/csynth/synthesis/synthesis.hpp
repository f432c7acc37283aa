#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csynth/contracts/contracts.hpp"
#include "csynth/sysmodel/network.hpp"
#include "csynth/viability/viability.hpp"

namespace csynth::synthesis {

using contracts::ContractParams;
using contracts::ContractTemplate;
using sysmodel::Network;
using viability::ViableSolution;

enum class Method { Centralized, Compositional };
enum class Status { Correct, Failed };

const char* to_string(Method m);
const char* to_string(Status s);
Method method_from_string(const std::string& s);

/// Clamps alpha into [lo, hi] element-wise.
Eigen::VectorXd project_box(const Eigen::VectorXd& alpha, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
/// Clamps alpha into [0, hi].
Eigen::VectorXd project_box(const Eigen::VectorXd& alpha, const Eigen::VectorXd& hi);

struct DescentConfig {
  double step = 1.0;  // initial step of each line search (or the fixed step)
  int max_iters = 500;
  double tol = 1e-6;
  /// Base generator count per subsystem (see PotentialOptions::k); empty
  /// picks the smallest of n, 2n, 4n, 8n with a finite potential.
  std::vector<int> k;
  int k_cap_factor = 8;
  int reduction_order = 1;
  bool line_search = true;
  /// Try the step V / |g|^2 (target value 0) before backtracking from `step`.
  bool polyak_trial = false;
  double armijo = 1e-4;
  int max_halvings = 40;
  /// When the subgradient step fails, up to this many rounds of gradient
  /// sampling at radius sampling_radius * alpha_max (shrunk 10x per round).
  int sampling_rounds = 3;
  double sampling_radius = 1e-2;
  int sampling_points = 0;  // 0: min(dim, 16) + 1
  /// Starting point alpha_max * initial_fraction unless random_start is set,
  /// in which case alpha is drawn uniformly in the box from `seed`.
  double initial_fraction = 0.5;
  bool random_start = false;
  std::uint64_t seed = 0;
  std::optional<Eigen::VectorXd> initial_alpha;
  viability::TubeMode finite_mode = viability::TubeMode::Growing;
  double beta = 0.0;  // invariant mode, see PotentialOptions::beta
  double time_budget_seconds = lp::kInf;  // wall clock, checked between iterations
  int threads = 0;  // 0: CONTRACT_SYNTH_THREADS or hardware concurrency
  lp::SolverOptions solver;

  void validate() const;
};

struct CentralizedConfig {
  std::vector<int> k;  // as in DescentConfig
  int k_cap_factor = 8;
  int reduction_order = 0;
  viability::TubeMode finite_mode = viability::TubeMode::Growing;
  double beta = 0.0;
  lp::SolverOptions solver;
};

struct TraceEntry {
  int iteration;
  double value;
  double grad_norm;
  double step;        // accepted step, 0 when none
  double solve_seconds;
};

struct Timings {
  double solver_seconds = 0.0;  // LP solver time only
  double wall_seconds = 0.0;
};

struct SynthesisResult {
  Status status = Status::Failed;
  Method method = Method::Compositional;
  ContractParams params;
  std::vector<ViableSolution> solutions;  // per subsystem, empty when failed
  std::vector<int> k;
  int reduction_order = 0;
  double beta = 0.0;
  viability::TubeMode finite_mode = viability::TubeMode::Growing;
  double potential = 0.0;
  int iterations = 0;
  std::vector<TraceEntry> trace;
  Timings timings;
  contracts::CorrectnessReport correctness;
  bool guarantees_certified = false;
  std::string hint;  // machine-readable retry advice when failed
  std::string message;

  [[nodiscard]] bool correct() const { return status == Status::Correct; }
};

/// Single LP over all subsystems with alpha as decision variables in
/// [0, alpha_max], minimising the sum of state alphas. Retries with larger k
/// when k is not given.
SynthesisResult centralized_synthesize(const Network& net, const ContractTemplate& tmpl,
                                       const CentralizedConfig& cfg = {});

/// Projected gradient descent on the potential.
SynthesisResult compositional_synthesize(const Network& net, const ContractTemplate& tmpl,
                                         const DescentConfig& cfg = {});

/// Centralized controller for the aggregated network (one invariant set for
/// the whole state). Infinite mode only; used as a timing baseline.
struct DenseResult {
  bool feasible = false;
  int k = 0;
  double solver_seconds = 0.0;
  double wall_seconds = 0.0;
  bool time_limit_reached = false;
};
DenseResult centralized_dense(const Network& net, int k = 0, const lp::SolverOptions& solver = {});

/// Omega_i(t) in X_i(t) for every state step (terminal included) and
/// Theta_i(t) in U_i(t), certified by the containment LP.
bool certify_guarantees(const Network& net, const std::vector<ViableSolution>& solutions);

/// Writes params.json, solution_<id>.json, trace.csv and report.json.
void write_result(const SynthesisResult& result, const Network& net, const std::filesystem::path& dir);
/// Reads back what write_result wrote (solutions and params).
SynthesisResult read_result(const std::filesystem::path& dir, const Network& net, const ContractTemplate& tmpl);

}  // namespace csynth::synthesis
