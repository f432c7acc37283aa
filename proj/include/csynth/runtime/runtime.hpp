#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csynth/geom/membership.hpp"
#include "csynth/io/json.hpp"
#include "csynth/sysmodel/network.hpp"
#include "csynth/viability/viability.hpp"

namespace csynth::runtime {

using sysmodel::Network;
using viability::ViableSolution;

/// First place a trajectory left its viable set.
struct Violation {
  int subsystem = 0;  // index into net.subsystems
  int t = 0;
  std::string what;   // "state" (x_i(t) outside Omega_i(t))
};

struct Trajectory {
  std::vector<std::vector<Eigen::VectorXd>> x;  // [i][t], t = 0..steps
  std::vector<std::vector<Eigen::VectorXd>> u;  // [i][t], t < steps
  std::vector<std::vector<Eigen::VectorXd>> d;
  std::optional<Violation> violation;

  [[nodiscard]] int steps() const { return x.empty() ? 0 : static_cast<int>(u[0].size()); }
};

/**
 * Local controllers of a network, one per subsystem. input() only reads the
 * subsystem's own state and solution. Invariant solutions serve every t;
 * finite ones serve t < horizon.
 */
class DecentralizedController {
 public:
  DecentralizedController(const Network& net, const std::vector<ViableSolution>& solutions,
                          double tolerance = 1e-7);

  /// u_i(t) from x_i alone, or nullopt when x_i is outside Omega_i(t).
  std::optional<Eigen::VectorXd> input(int i, int t, const Eigen::VectorXd& x_i);
  /// x_i in Omega_i(t), t up to the horizon for finite solutions.
  bool contains(int i, int t, const Eigen::VectorXd& x_i);
  /// Largest |zeta| entry of the witness from the last input()/contains()
  /// call that succeeded.
  [[nodiscard]] double last_witness_norm() const;

  [[nodiscard]] int size() const { return static_cast<int>(solutions_.size()); }
  [[nodiscard]] bool invariant() const { return invariant_; }
  [[nodiscard]] const ViableSolution& solution(int i) const { return solutions_[static_cast<std::size_t>(i)]; }

 private:
  geom::PointLocator& locator(int i, int t);

  std::vector<ViableSolution> solutions_;
  std::vector<std::vector<geom::PointLocator>> locators_;  // [i][t]
  bool invariant_ = false;
  Eigen::VectorXd witness_;
};

struct StepResult {
  std::vector<Eigen::VectorXd> next;
  std::vector<Eigen::VectorXd> inputs;
  std::optional<Violation> violation;  // set when some x_i(t) was outside Omega_i(t)
};

/// One step of the coupled network: each u_i from x_i only, then
/// x_i(t+1) = A_ii x_i + B_ii u_i + sum_j (A_ij x_j + B_ij u_j) + d_i.
StepResult step(const Network& net, DecentralizedController& ctrl, const std::vector<Eigen::VectorXd>& states,
                int t, const std::vector<Eigen::VectorXd>& disturbances);

/// Point of Z(c, G) for coefficients zeta.
Eigen::VectorXd sample_point(const geom::Zonotope& z, const Eigen::VectorXd& zeta);

enum class Sampling { Uniform, Vertex };

/// zeta uniform in [-1, 1]^p, or a uniform random sign pattern.
Eigen::VectorXd sample_zeta(int p, Sampling mode, std::mt19937_64& rng);

/// Seed of trajectory s derived from the master seed.
std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t s);

/// Starts in Omega_i(0) and runs `steps` steps (the horizon for finite
/// solutions when steps <= 0) with disturbances drawn from D_i(t). Stops at
/// the first violation.
Trajectory simulate(const Network& net, DecentralizedController& ctrl, int steps, std::uint64_t seed,
                    Sampling initial = Sampling::Uniform, Sampling disturbance = Sampling::Uniform);

/// Replays a trajectory from given initial states and disturbances.
Trajectory simulate(const Network& net, DecentralizedController& ctrl, const std::vector<Eigen::VectorXd>& x0,
                    const std::vector<std::vector<Eigen::VectorXd>>& disturbances);

struct VerifyOptions {
  int samples = 10000;
  int steps = 0;  // 0: horizon (finite) or 100 (invariant)
  std::uint64_t seed = 0;
  int threads = 0;
  /// One-step sweep over all disturbance vertices of D_i when p_i <= this
  /// (random sign patterns otherwise), from this many sampled network states.
  int vertex_limit = 12;
  int vertex_states = 200;
  double tolerance = 1e-7;
  int keep_violations = 10;
};

struct VerifyReport {
  int samples = 0;
  int steps = 0;
  std::uint64_t seed = 0;
  long long violations = 0;          // trajectories that left their sets
  long long vertex_checks = 0;
  long long vertex_violations = 0;
  bool vacuous = false;              // nothing sampled
  std::vector<double> max_witness;   // per t: largest witness entry seen
  std::vector<Violation> examples;   // first few, in trajectory order
  double seconds = 0.0;

  [[nodiscard]] bool passed() const { return violations == 0 && vertex_violations == 0; }
};

/// Monte Carlo check of the closed loop. Half the trajectories use uniform
/// zeta, the other half random sign patterns, for both initial states and
/// disturbances; then the vertex sweep.
VerifyReport verify_invariance(const Network& net, const std::vector<ViableSolution>& solutions,
                               const VerifyOptions& options = {});

io::Json report_to_json(const VerifyReport& report, const Network& net);

/// CSV with columns t,id,x0..,u0.. (inputs empty on the last row).
void write_trajectory_csv(const Trajectory& traj, const Network& net, const std::filesystem::path& path);

}  // namespace csynth::runtime
