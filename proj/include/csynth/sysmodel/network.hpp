#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csynth/geom/zonotope.hpp"
#include "csynth/io/json.hpp"

namespace csynth::sysmodel {

using geom::Zonotope;

/// Invalid network description (schema, dimensions, references).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { Finite, Infinite };

const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

/// Influence of subsystem `source` on its owner: A_ij(t), B_ij(t).
struct Coupling {
  int source = -1;  // index into Network::subsystems
  std::vector<Eigen::MatrixXd> a;  // per step, n_i x n_j
  std::vector<Eigen::MatrixXd> b;  // per step, n_i x m_j
};

/**
 * One subsystem x_i(t+1) = A_ii x_i + B_ii u_i + sum_j (A_ij x_j + B_ij u_j) + d_i.
 *
 * Per-step data has one entry per step t = 0..h-1 (finite) or a single entry
 * (infinite). X has h+1 entries in finite mode.
 */
struct Subsystem {
  int id = 0;
  int n = 0;
  int m = 0;
  std::vector<Eigen::MatrixXd> a;
  std::vector<Eigen::MatrixXd> b;
  std::vector<Coupling> couplings;  // sorted by source
  std::vector<Zonotope> x_bound;
  std::vector<Zonotope> u_bound;
  std::vector<Zonotope> d_set;
};

struct Network {
  Mode mode = Mode::Infinite;
  int horizon = 1;  // finite mode only
  std::vector<Subsystem> subsystems;  // sorted by id

  [[nodiscard]] int size() const { return static_cast<int>(subsystems.size()); }
  /// Number of dynamics steps: h (finite) or 1 (infinite).
  [[nodiscard]] int steps() const { return mode == Mode::Finite ? horizon : 1; }
  [[nodiscard]] int total_state_dim() const;
  [[nodiscard]] int total_input_dim() const;

  // Time-indexed accessors; in infinite mode every t maps to the single entry.
  [[nodiscard]] const Eigen::MatrixXd& A(int i, int t) const;
  [[nodiscard]] const Eigen::MatrixXd& B(int i, int t) const;
  [[nodiscard]] const Zonotope& X(int i, int t) const;
  [[nodiscard]] const Zonotope& U(int i, int t) const;
  [[nodiscard]] const Zonotope& D(int i, int t) const;
  [[nodiscard]] const Eigen::MatrixXd& coupling_A(int i, std::size_t c, int t) const;
  [[nodiscard]] const Eigen::MatrixXd& coupling_B(int i, std::size_t c, int t) const;

  /// True when some other subsystem receives x_i (resp. u_i) through a nonzero
  /// coupling matrix at step t.
  [[nodiscard]] bool state_is_coupled_out(int i, int t) const;
  [[nodiscard]] bool input_is_coupled_out(int i, int t) const;

  /// Aggregated dynamics of the whole network at step t.
  [[nodiscard]] Eigen::MatrixXd aggregated_A(int t) const;
  [[nodiscard]] Eigen::MatrixXd aggregated_B(int t) const;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

Network network_from_json(const io::Json& j);
io::Json network_to_json(const Network& net);
Network load_network(const std::filesystem::path& path);
void save_network(const Network& net, const std::filesystem::path& path);

struct RandomNetworkOptions {
  double field_size = 100.0;
  double neighbor_distance = 10.0;  // neighbors iff distance < this
};

/// Random planar network: subsystem points uniform in the square field,
/// double-integrator-like dynamics, couplings lambda / (1 + dist) * ones(2,2).
Network random_network(int num_subsystems, double lambda, std::uint64_t seed,
                       const RandomNetworkOptions& options = {});

/// Points used by random_network for a given seed (for inspection).
std::vector<Eigen::Vector2d> random_network_points(int num_subsystems, std::uint64_t seed,
                                                   double field_size = 100.0);

/// Network with the given points and the random-network data.
Network planar_network(const std::vector<Eigen::Vector2d>& points, double lambda,
                       double neighbor_distance = 10.0);

}  // namespace csynth::sysmodel
