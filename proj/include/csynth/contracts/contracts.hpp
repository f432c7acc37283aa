#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "csynth/geom/zonotope.hpp"
#include "csynth/io/json.hpp"
#include "csynth/lp/linear_program.hpp"
#include "csynth/sysmodel/network.hpp"
#include "csynth/viability/tube.hpp"
#include "csynth/viability/viability.hpp"

namespace csynth::contracts {

using geom::Zonotope;
using sysmodel::Network;
using viability::ViableSolution;

class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Channel { State = 0, Input = 1 };
const char* to_string(Channel c);

/**
 * Guarantee templates Z(cbar, C) per subsystem, step and channel. A channel is
 * active when some neighbour actually receives it; inactive channels carry no
 * parameters and their guarantee is the fixed template set itself.
 */
struct ContractTemplate {
  std::vector<std::vector<Zonotope>> state;  // [i][t], t < steps
  std::vector<std::vector<Zonotope>> input;
  std::vector<std::vector<bool>> state_active;
  std::vector<std::vector<bool>> input_active;

  [[nodiscard]] int size() const { return static_cast<int>(state.size()); }
  [[nodiscard]] int steps() const { return state.empty() ? 0 : static_cast<int>(state[0].size()); }
  [[nodiscard]] const Zonotope& set(int i, int t, Channel c) const;
  [[nodiscard]] bool active(int i, int t, Channel c) const;
  void validate(const Network& net) const;
};

/// Templates equal to the hard bounds X_i(t), U_i(t).
ContractTemplate default_template(const Network& net);

/// Flat indexing of all alpha entries: blocks ordered by subsystem, step,
/// channel (state before input).
class ParamLayout {
 public:
  struct Block {
    int subsystem;
    int t;
    Channel channel;
    int offset;
    int size;
  };

  ParamLayout() = default;
  explicit ParamLayout(const ContractTemplate& tmpl);

  [[nodiscard]] int total() const { return total_; }
  [[nodiscard]] int steps() const { return steps_; }
  [[nodiscard]] const std::vector<Block>& blocks() const { return blocks_; }
  /// Offset of the block, or -1 when the channel is inactive.
  [[nodiscard]] int offset(int i, int t, Channel c) const;
  [[nodiscard]] int size(int i, int t, Channel c) const;
  /// Block holding flat index k.
  [[nodiscard]] const Block& block_of(int k) const;
  /// Human-readable label such as "x3[t=0][1]" (subsystem id, not index).
  [[nodiscard]] std::string label(int k, const Network& net) const;

 private:
  [[nodiscard]] std::size_t slot(int i, int t, Channel c) const;
  int steps_ = 0;
  int total_ = 0;
  std::vector<Block> blocks_;
  std::vector<int> block_index_;  // per (i, t, channel), -1 if inactive
};

/// Current parameters and their box [0, alpha_max].
struct ContractParams {
  ParamLayout layout;
  Eigen::VectorXd alpha;
  Eigen::VectorXd alpha_max;

  [[nodiscard]] Eigen::VectorXd segment(int i, int t, Channel c) const;
};

/// Largest admissible scalings: per active (i, t, channel) maximises sum(alpha)
/// subject to Z(cbar, C Diag(alpha)) inside the hard bound.
Eigen::VectorXd alpha_max(const ContractTemplate& tmpl, const Network& net);

/// Parameters at alpha_max * fraction.
ContractParams initial_params(const ContractTemplate& tmpl, const Network& net, double fraction = 0.5);

/// Z(cbar, C Diag(alpha)) for an active channel, the template set otherwise.
Zonotope guarantee_set(const ContractTemplate& tmpl, const ParamLayout& layout, const Eigen::VectorXd& alpha,
                       int i, int t, Channel c);

/**
 * Augmented disturbance of subsystem i at step t in column form. Column j of
 * `columns` is multiplied by alpha[alpha_index[j]], or by 1 when the index is
 * -1. Columns are ordered by neighbour id (state before input), then D_i.
 */
struct AugmentedColumns {
  Eigen::VectorXd center;
  Eigen::MatrixXd columns;
  std::vector<int> alpha_index;

  [[nodiscard]] Zonotope evaluate(const Eigen::VectorXd& alpha) const;
};

AugmentedColumns augmented_columns(const Network& net, const ContractTemplate& tmpl, const ParamLayout& layout,
                                   int i, int t);
Zonotope augmented_disturbance(const Network& net, const ContractTemplate& tmpl, const ContractParams& params, int i,
                               int t);

struct Margin {
  int subsystem;
  int t;
  Channel channel;
  double margin;   // directed Hausdorff distance, 0 when contained
  bool certified;  // containment LP certificate found
};

struct CorrectnessReport {
  bool correct = true;
  std::vector<Margin> margins;
};

/// Omega_i(t) in X_i(t, alpha) and Theta_i(t) in U_i(t, alpha) for every i, t.
/// Invariant solutions are checked once.
CorrectnessReport check_correctness(const Network& net, const ContractTemplate& tmpl, const ContractParams& params,
                                    const std::vector<ViableSolution>& solutions);

struct PotentialOptions {
  /// Base generator count per subsystem: empty means n_i, one entry applies
  /// to all subsystems.
  std::vector<int> k;
  /// Boxing order for the augmented disturbance; 0 keeps it unreduced.
  int reduction_order = 1;
  viability::TubeMode finite_mode = viability::TubeMode::Growing;
  /// Invariant mode only: beta > 0 uses the general form with
  /// E in Z(0, beta W(alpha)) and Omega = Z(xbar, T / (1 - beta)).
  double beta = 0.0;
  lp::SolverOptions solver;

  [[nodiscard]] int k_for(int i, const Network& net) const;
};

struct PotentialEval {
  int subsystem = 0;
  lp::LpStatus status = lp::LpStatus::Error;
  double value = 0.0;  // +inf when the tube program itself is infeasible
  std::vector<std::pair<int, double>> gradient;  // (flat alpha index, dV_i/dalpha)
  std::optional<ViableSolution> solution;
  std::vector<double> dx;  // per step
  std::vector<double> du;
  double solve_seconds = 0.0;

  [[nodiscard]] bool finite() const { return status == lp::LpStatus::Optimal; }
};

/// V_i(alpha): smallest total Hausdorff slack of subsystem i's viable tube
/// against its own guarantees, under the disturbance assumed from alpha.
PotentialEval potential_component(const Network& net, const ContractTemplate& tmpl, const ContractParams& params,
                                  int i, const PotentialOptions& options = {});

/// LP pieces of one subsystem's tube under its assumed disturbance.
struct ComponentVars {
  viability::TubeVars tube;
  viability::TubeMode mode = viability::TubeMode::Growing;
  int k = 0;
  double beta = 0.0;
  std::vector<lp::Var> dx;  // slack per step, empty without slack
  std::vector<lp::Var> du;
};

/// Maps a flat alpha index to its expression in the program.
using AlphaExpr = std::function<lp::LinExpr(int)>;

/**
 * Adds subsystem i's tube, dynamics and guarantee containments to `prog`,
 * with every name prefixed by `prefix`. Alpha entries enter through
 * `alpha_of`; params.alpha is only used to pick the generators kept by boxing
 * orders above 1. With `slack`, each guarantee gets a Hausdorff slack variable
 * that is added to `objective`. Finite networks also get the terminal
 * containment in X_i(h), with its own slack when `slack` is set.
 */
ComponentVars add_component(lp::LinearProgram& prog, const std::string& prefix, const Network& net,
                            const ContractTemplate& tmpl, const ContractParams& params, int i,
                            const PotentialOptions& options, const AlphaExpr& alpha_of, bool slack,
                            lp::LinExpr& objective);

/// Tube of a solved component, with the 1 / (1 - beta) factor applied.
ViableSolution read_component(const lp::LpSolution& sol, const ComponentVars& vars);

/// Viable tube of subsystem i with the guarantees imposed as hard
/// containments (no slack); nullopt when infeasible.
std::optional<ViableSolution> satisfy_component(const Network& net, const ContractTemplate& tmpl,
                                                const ContractParams& params, int i,
                                                const PotentialOptions& options = {}, double* solve_seconds = nullptr);

struct PotentialValue {
  double value = 0.0;
  Eigen::VectorXd gradient;
  std::vector<PotentialEval> components;
  double solve_seconds = 0.0;  // summed over components
  [[nodiscard]] bool finite() const;
};

/// V = sum_i V_i with the gradient scattered onto the flat alpha vector.
/// Components run on up to `threads` workers; the sum is taken in index order.
PotentialValue potential(const Network& net, const ContractTemplate& tmpl, const ContractParams& params,
                         const PotentialOptions& options = {}, int threads = 0);

io::Json params_to_json(const ContractParams& params, const Network& net);
/// Reads alpha and alpha_max back into a layout built from `tmpl`.
ContractParams params_from_json(const io::Json& j, const ContractTemplate& tmpl, const Network& net);

}  // namespace csynth::contracts
