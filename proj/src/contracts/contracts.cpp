#include "csynth/contracts/contracts.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "csynth/geom/containment.hpp"
#include "csynth/util/parallel.hpp"
#include "csynth/viability/tube.hpp"

namespace csynth::contracts {

using lp::ExprMatrix;
using lp::ExprVector;
using lp::LinExpr;
using viability::LeadBlock;
using viability::TubeMode;

const char* to_string(Channel c) { return c == Channel::State ? "state" : "input"; }

namespace {

bool nonzero(const Eigen::MatrixXd& m) { return m.size() > 0 && (m.array() != 0.0).any(); }

std::string where(const Network& net, int i, int t) {
  return "subsystem " + std::to_string(net.subsystems[static_cast<std::size_t>(i)].id) + ", t=" + std::to_string(t);
}

}  // namespace

// ---------------------------------------------------------------- template

const Zonotope& ContractTemplate::set(int i, int t, Channel c) const {
  const auto& v = c == Channel::State ? state : input;
  return v.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(t));
}

bool ContractTemplate::active(int i, int t, Channel c) const {
  const auto& v = c == Channel::State ? state_active : input_active;
  return v.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(t));
}

void ContractTemplate::validate(const Network& net) const {
  if (size() != net.size()) throw ContractError("template has " + std::to_string(size()) + " subsystems, network has " +
                                                std::to_string(net.size()));
  for (int i = 0; i < size(); ++i) {
    const auto& s = net.subsystems[static_cast<std::size_t>(i)];
    const auto si = static_cast<std::size_t>(i);
    if (static_cast<int>(state[si].size()) != net.steps() || static_cast<int>(input[si].size()) != net.steps() ||
        state_active[si].size() != state[si].size() || input_active[si].size() != input[si].size())
      throw ContractError("template for subsystem " + std::to_string(s.id) + " has the wrong number of steps");
    for (int t = 0; t < net.steps(); ++t) {
      if (set(i, t, Channel::State).dim() != s.n || set(i, t, Channel::Input).dim() != s.m)
        throw ContractError("template dimension mismatch at " + where(net, i, t));
      if (active(i, t, Channel::State) && set(i, t, Channel::State).num_generators() < 1)
        throw ContractError("state template without generators at " + where(net, i, t));
      if (active(i, t, Channel::Input) && set(i, t, Channel::Input).num_generators() < 1)
        throw ContractError("input template without generators at " + where(net, i, t));
    }
  }
}

ContractTemplate default_template(const Network& net) {
  ContractTemplate tmpl;
  for (int i = 0; i < net.size(); ++i) {
    std::vector<Zonotope> xs, us;
    std::vector<bool> xa, ua;
    const int m = net.subsystems[static_cast<std::size_t>(i)].m;
    for (int t = 0; t < net.steps(); ++t) {
      xs.push_back(net.X(i, t));
      us.push_back(m > 0 ? net.U(i, t) : Zonotope(Eigen::VectorXd(0), Eigen::MatrixXd(0, 0)));
      xa.push_back(net.state_is_coupled_out(i, t));
      ua.push_back(m > 0 && net.input_is_coupled_out(i, t));
    }
    tmpl.state.push_back(std::move(xs));
    tmpl.input.push_back(std::move(us));
    tmpl.state_active.push_back(std::move(xa));
    tmpl.input_active.push_back(std::move(ua));
  }
  return tmpl;
}

// ---------------------------------------------------------------- layout

ParamLayout::ParamLayout(const ContractTemplate& tmpl) : steps_(tmpl.steps()) {
  block_index_.assign(static_cast<std::size_t>(tmpl.size() * steps_ * 2), -1);
  for (int i = 0; i < tmpl.size(); ++i)
    for (int t = 0; t < steps_; ++t)
      for (Channel c : {Channel::State, Channel::Input}) {
        if (!tmpl.active(i, t, c)) continue;
        const int size = tmpl.set(i, t, c).num_generators();
        block_index_[slot(i, t, c)] = static_cast<int>(blocks_.size());
        blocks_.push_back({i, t, c, total_, size});
        total_ += size;
      }
}

std::size_t ParamLayout::slot(int i, int t, Channel c) const {
  return static_cast<std::size_t>((i * steps_ + t) * 2 + static_cast<int>(c));
}

int ParamLayout::offset(int i, int t, Channel c) const {
  const int b = block_index_.at(slot(i, t, c));
  return b < 0 ? -1 : blocks_[static_cast<std::size_t>(b)].offset;
}

int ParamLayout::size(int i, int t, Channel c) const {
  const int b = block_index_.at(slot(i, t, c));
  return b < 0 ? 0 : blocks_[static_cast<std::size_t>(b)].size;
}

const ParamLayout::Block& ParamLayout::block_of(int k) const {
  for (const Block& b : blocks_)
    if (k >= b.offset && k < b.offset + b.size) return b;
  throw std::out_of_range("alpha index " + std::to_string(k) + " out of range");
}

std::string ParamLayout::label(int k, const Network& net) const {
  const Block& b = block_of(k);
  return std::string(b.channel == Channel::State ? "x" : "u") +
         std::to_string(net.subsystems[static_cast<std::size_t>(b.subsystem)].id) + "[t=" + std::to_string(b.t) +
         "][" + std::to_string(k - b.offset) + "]";
}

Eigen::VectorXd ContractParams::segment(int i, int t, Channel c) const {
  const int off = layout.offset(i, t, c);
  if (off < 0) return {};
  return alpha.segment(off, layout.size(i, t, c));
}

// ---------------------------------------------------------------- alpha max

Eigen::VectorXd alpha_max(const ContractTemplate& tmpl, const Network& net) {
  tmpl.validate(net);
  const ParamLayout layout(tmpl);
  Eigen::VectorXd out(layout.total());
  for (const auto& b : layout.blocks()) {
    const Zonotope& z = tmpl.set(b.subsystem, b.t, b.channel);
    const Zonotope& hard = b.channel == Channel::State ? net.X(b.subsystem, b.t) : net.U(b.subsystem, b.t);
    lp::LinearProgram prog;
    const lp::VarBlock a = prog.add_variables("alpha", 1, b.size);
    ExprMatrix gens(z.dim(), b.size);
    LinExpr total;
    for (int c = 0; c < b.size; ++c) {
      for (int r = 0; r < z.dim(); ++r) gens(r, c) = LinExpr(a(0, c), z.generators()(r, c));
      total.add(a(0, c), -1.0);
    }
    geom::encode_containment(prog, "tpl", {lp::constant_vector(z.center()), gens},
                             lp::constant_vector(hard.center()), hard.generators(),
                             std::vector<LinExpr>(static_cast<std::size_t>(hard.num_generators()), LinExpr(1.0)));
    prog.minimize(total);
    const lp::LpSolution sol = lp::solve(prog);
    const std::string ctx = std::string(to_string(b.channel)) + " template at " + where(net, b.subsystem, b.t);
    if (sol.status == lp::LpStatus::Infeasible)
      throw ContractError(ctx + " cannot be placed inside the hard bound even at alpha = 0");
    if (sol.status == lp::LpStatus::Unbounded) throw ContractError(ctx + " has a zero generator column");
    if (!sol.optimal()) throw lp::SolverError(ctx + ": " + sol.message);
    for (int c = 0; c < b.size; ++c) out(b.offset + c) = std::max(0.0, sol.value(a(0, c)));
  }
  return out;
}

ContractParams initial_params(const ContractTemplate& tmpl, const Network& net, double fraction) {
  ContractParams p;
  p.layout = ParamLayout(tmpl);
  p.alpha_max = alpha_max(tmpl, net);
  p.alpha = fraction * p.alpha_max;
  return p;
}

Zonotope guarantee_set(const ContractTemplate& tmpl, const ParamLayout& layout, const Eigen::VectorXd& alpha,
                       int i, int t, Channel c) {
  const Zonotope& z = tmpl.set(i, t, c);
  const int off = layout.offset(i, t, c);
  if (off < 0) return z;
  return geom::scale_generators(z, alpha.segment(off, z.num_generators()));
}

// ---------------------------------------------------------------- augmented disturbance

Zonotope AugmentedColumns::evaluate(const Eigen::VectorXd& alpha) const {
  Eigen::MatrixXd g = columns;
  for (int c = 0; c < g.cols(); ++c) {
    const int k = alpha_index[static_cast<std::size_t>(c)];
    if (k >= 0) g.col(c) *= alpha(k);
  }
  return {center, std::move(g)};
}

AugmentedColumns augmented_columns(const Network& net, const ContractTemplate& tmpl, const ParamLayout& layout,
                                   int i, int t) {
  const auto& sub = net.subsystems.at(static_cast<std::size_t>(i));
  AugmentedColumns out;
  out.center = Eigen::VectorXd::Zero(sub.n);
  std::vector<Eigen::VectorXd> cols;
  auto add_term = [&](const Eigen::MatrixXd& a, int j, Channel ch) {
    if (!nonzero(a)) return;
    const Zonotope& z = tmpl.set(j, t, ch);
    out.center += a * z.center();
    const int off = layout.offset(j, t, ch);
    const Eigen::MatrixXd img = a * z.generators();
    for (int c = 0; c < img.cols(); ++c) {
      cols.push_back(img.col(c));
      out.alpha_index.push_back(off < 0 ? -1 : off + c);
    }
  };
  for (std::size_t c = 0; c < sub.couplings.size(); ++c) {
    const int j = sub.couplings[c].source;
    add_term(net.coupling_A(i, c, t), j, Channel::State);
    if (net.subsystems[static_cast<std::size_t>(j)].m > 0) add_term(net.coupling_B(i, c, t), j, Channel::Input);
  }
  const Zonotope& d = net.D(i, t);
  out.center += d.center();
  for (int c = 0; c < d.num_generators(); ++c) {
    cols.push_back(d.generators().col(c));
    out.alpha_index.push_back(-1);
  }
  out.columns.resize(sub.n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.columns.col(static_cast<Eigen::Index>(c)) = cols[c];
  return out;
}

Zonotope augmented_disturbance(const Network& net, const ContractTemplate& tmpl, const ContractParams& params, int i,
                               int t) {
  return augmented_columns(net, tmpl, params.layout, i, t).evaluate(params.alpha);
}

// ---------------------------------------------------------------- correctness

CorrectnessReport check_correctness(const Network& net, const ContractTemplate& tmpl, const ContractParams& params,
                                    const std::vector<ViableSolution>& solutions) {
  if (static_cast<int>(solutions.size()) != net.size())
    throw ContractError("check_correctness: expected one solution per subsystem");
  CorrectnessReport rep;
  auto check = [&](const Zonotope& inner, const Zonotope& outer, int i, int t, Channel c) {
    const bool ok = geom::containment_lp(inner, outer).feasible;
    const double margin = ok ? 0.0 : geom::directed_hausdorff(outer, inner);
    rep.margins.push_back({i, t, c, margin, ok});
    if (!ok) rep.correct = false;
  };
  for (int i = 0; i < net.size(); ++i) {
    const ViableSolution& s = solutions[static_cast<std::size_t>(i)];
    const int steps = s.invariant() ? 1 : net.steps();
    for (int t = 0; t < steps; ++t) {
      check(s.omega(t), guarantee_set(tmpl, params.layout, params.alpha, i, t, Channel::State), i, t, Channel::State);
      if (net.subsystems[static_cast<std::size_t>(i)].m > 0)
        check(s.theta(t), guarantee_set(tmpl, params.layout, params.alpha, i, t, Channel::Input), i, t,
              Channel::Input);
    }
  }
  return rep;
}

// ---------------------------------------------------------------- potential

int PotentialOptions::k_for(int i, const Network& net) const {
  if (k.empty()) return net.subsystems.at(static_cast<std::size_t>(i)).n;
  if (k.size() == 1) return k[0];
  return k.at(static_cast<std::size_t>(i));
}

namespace {

// Augmented disturbance generators boxed to the requested order, as
// G * diag(weight) with weights linear in the alpha variables.
struct WeightedGenerators {
  Eigen::MatrixXd G;
  std::vector<LinExpr> weight;

  [[nodiscard]] ExprMatrix expr() const {
    ExprMatrix w(static_cast<int>(G.rows()), static_cast<int>(G.cols()));
    for (int c = 0; c < G.cols(); ++c)
      for (int r = 0; r < G.rows(); ++r)
        if (G(r, c) != 0.0) w(r, c) = G(r, c) * weight[static_cast<std::size_t>(c)];
    return w;
  }
};

WeightedGenerators disturbance_expr(const AugmentedColumns& ac, const Eigen::VectorXd& alpha_hat, int order,
                                    const std::function<LinExpr(int)>& alpha_of) {
  const int n = static_cast<int>(ac.columns.rows());
  const int q = static_cast<int>(ac.columns.cols());
  auto scale = [&](int c) {
    const int k = ac.alpha_index[static_cast<std::size_t>(c)];
    return k < 0 ? LinExpr(1.0) : alpha_of(k);
  };
  std::vector<bool> kept(static_cast<std::size_t>(q), true);
  const bool box = order == 1 || (order > 1 && q > order * n);
  if (box) {
    std::fill(kept.begin(), kept.end(), false);
    if (order > 1)
      for (int c : geom::boxing_kept_generators(ac.evaluate(alpha_hat).generators(), order))
        kept[static_cast<std::size_t>(c)] = true;
  }
  int count = 0;
  for (bool k : kept) count += k ? 1 : 0;
  WeightedGenerators w;
  w.G = Eigen::MatrixXd::Zero(n, count + (box ? n : 0));
  w.weight.assign(static_cast<std::size_t>(w.G.cols()), LinExpr(0.0));
  int col = 0;
  for (int c = 0; c < q; ++c) {
    if (!kept[static_cast<std::size_t>(c)]) continue;
    w.G.col(col) = ac.columns.col(c);
    w.weight[static_cast<std::size_t>(col)] = scale(c);
    ++col;
  }
  if (box) {
    // half-widths are linear because alpha >= 0
    for (int r = 0; r < n; ++r) w.G(r, col + r) = 1.0;
    for (int c = 0; c < q; ++c) {
      if (kept[static_cast<std::size_t>(c)]) continue;
      const LinExpr s = scale(c);
      for (int r = 0; r < n; ++r)
        if (ac.columns(r, c) != 0.0) w.weight[static_cast<std::size_t>(col + r)] += std::abs(ac.columns(r, c)) * s;
    }
  }
  return w;
}

}  // namespace

ComponentVars add_component(lp::LinearProgram& prog, const std::string& prefix, const Network& net,
                            const ContractTemplate& tmpl, const ContractParams& params, int i,
                            const PotentialOptions& options, const AlphaExpr& alpha_of, bool slack,
                            LinExpr& objective) {
  const auto& sub = net.subsystems.at(static_cast<std::size_t>(i));
  const int n = sub.n;
  const int m = sub.m;
  const int steps = net.steps();
  const bool finite = net.mode == sysmodel::Mode::Finite;
  ComponentVars c;
  c.k = options.k_for(i, net);
  if (c.k < 1) throw std::invalid_argument("potential: k must be >= 1");
  c.mode = finite ? options.finite_mode : TubeMode::Invariant;

  const double beta = finite ? 0.0 : options.beta;
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("potential: beta must lie in [0, 1)");
  std::vector<AugmentedColumns> aug;
  std::vector<WeightedGenerators> wg;
  std::vector<ExprMatrix> w;
  std::vector<int> p;
  for (int t = 0; t < steps; ++t) {
    aug.push_back(augmented_columns(net, tmpl, params.layout, i, t));
    wg.push_back(disturbance_expr(aug.back(), params.alpha, options.reduction_order, alpha_of));
    w.push_back(wg.back().expr());
    p.push_back(w.back().cols());
  }

  const std::vector<int> cols = finite ? viability::tube_columns(c.mode, c.k, p) : std::vector<int>{c.k};
  c.tube = viability::add_tube_variables(prog, prefix, n, m, cols, steps);
  for (int t = 0; t < steps; ++t) {
    const auto st = static_cast<std::size_t>(t);
    const std::size_t nx = finite ? st + 1 : 0;
    const LeadBlock lead =
        c.mode == TubeMode::Growing ? LeadBlock::None : (beta > 0.0 ? LeadBlock::Free : LeadBlock::Zero);
    const ExprMatrix e = viability::tube_step(prog, prefix + "dyn[" + std::to_string(t) + "]", net.A(i, t),
                                              net.B(i, t), c.tube.xbar_expr(st), c.tube.T_expr(st),
                                              c.tube.ubar_expr(st), c.tube.M_expr(st),
                                              lp::constant_vector(aug[st].center), w[st], c.tube.xbar_expr(nx),
                                              c.tube.T_expr(nx), lead);
    if (lead == LeadBlock::Free && e.cols() > 0) {
      // E in Z(0, beta W(alpha))
      std::vector<LinExpr> bounds;
      for (const LinExpr& x : wg[st].weight) bounds.push_back(beta * x);
      geom::encode_containment(prog, prefix + "E", {ExprVector(static_cast<std::size_t>(n), LinExpr(0.0)), e},
                               ExprVector(static_cast<std::size_t>(n), LinExpr(0.0)), wg[st].G, bounds);
    }
  }
  c.beta = beta;

  auto guarantee = [&](const geom::ZonotopeExpr& inner, int t, Channel ch, std::vector<lp::Var>& slacks) {
    const std::string tag = prefix + (ch == Channel::State ? "X" : "U") + "[" + std::to_string(t) + "]";
    const Zonotope& z = tmpl.set(i, t, ch);
    std::vector<LinExpr> bounds;
    const int off = params.layout.offset(i, t, ch);
    for (int g = 0; g < z.num_generators(); ++g) bounds.push_back(off < 0 ? LinExpr(1.0) : alpha_of(off + g));
    std::optional<LinExpr> d;
    if (slack) {
      const lp::Var v = prog.add_variable(prefix + "d" + tag.substr(prefix.size()));
      slacks.push_back(v);
      objective.add(v, 1.0);
      d = LinExpr(v);
    }
    geom::encode_containment(prog, tag, inner, lp::constant_vector(z.center()), z.generators(), bounds, d);
  };
  const double grow = 1.0 / (1.0 - beta);
  auto scaled = [&](ExprMatrix x) {
    if (beta > 0.0)
      for (int col = 0; col < x.cols(); ++col)
        for (int r = 0; r < x.rows(); ++r) x(r, col) *= grow;
    return x;
  };
  for (int t = 0; t < steps; ++t) {
    const auto st = static_cast<std::size_t>(t);
    guarantee({c.tube.xbar_expr(st), scaled(c.tube.T_expr(st))}, t, Channel::State, c.dx);
    if (m > 0) guarantee({c.tube.ubar_expr(st), scaled(c.tube.M_expr(st))}, t, Channel::Input, c.du);
  }
  if (finite) {
    const auto h = static_cast<std::size_t>(steps);
    const Zonotope& xh = net.X(i, steps);
    std::optional<LinExpr> d;
    if (slack) {
      const lp::Var v = prog.add_variable(prefix + "dX[" + std::to_string(steps) + "]");
      c.dx.push_back(v);
      objective.add(v, 1.0);
      d = LinExpr(v);
    }
    geom::encode_containment(prog, prefix + "terminal", {c.tube.xbar_expr(h), c.tube.T_expr(h)},
                             lp::constant_vector(xh.center()), xh.generators(),
                             std::vector<LinExpr>(static_cast<std::size_t>(xh.num_generators()), LinExpr(1.0)), d);
  }
  return c;
}

ViableSolution read_component(const lp::LpSolution& sol, const ComponentVars& vars) {
  ViableSolution out = viability::read_tube(sol, vars.tube, vars.mode, vars.k);
  if (vars.beta > 0.0) {
    out.beta = vars.beta;
    for (auto& t : out.T) t /= 1.0 - vars.beta;
    for (auto& m : out.M) m /= 1.0 - vars.beta;
  }
  return out;
}

namespace {

struct ComponentLp {
  lp::LinearProgram prog;
  ComponentVars vars;
  std::vector<std::pair<int, lp::Constraint>> pins;
};

ComponentLp build_component(const Network& net, const ContractTemplate& tmpl, const ContractParams& params, int i,
                            const PotentialOptions& options, bool hard) {
  ComponentLp c;
  lp::LinearProgram& prog = c.prog;
  std::vector<std::optional<lp::Var>> alpha_vars(static_cast<std::size_t>(params.layout.total()));
  auto alpha_of = [&](int k) -> LinExpr {
    if (hard) return LinExpr(params.alpha(k));
    auto& v = alpha_vars[static_cast<std::size_t>(k)];
    if (!v) {
      v = prog.add_variable("alpha[" + std::to_string(k) + "]", -lp::kInf, lp::kInf);
      c.pins.emplace_back(k, prog.add_constraint("pin[" + std::to_string(k) + "]", LinExpr(*v), lp::Sense::Equal,
                                                 params.alpha(k)));
    }
    return LinExpr(*v);
  };
  LinExpr objective;
  c.vars = add_component(prog, "", net, tmpl, params, i, options, alpha_of, !hard, objective);
  if (hard) {
    for (std::size_t t = 0; t < c.vars.tube.T.size(); ++t)
      objective += viability::add_abs_sum(prog, "absT[" + std::to_string(t) + "]", c.vars.tube.T_expr(t));
  }
  prog.minimize(objective);
  return c;
}

}  // namespace

PotentialEval potential_component(const Network& net, const ContractTemplate& tmpl, const ContractParams& params,
                                  int i, const PotentialOptions& options) {
  const ComponentLp c = build_component(net, tmpl, params, i, options, false);
  const lp::LpSolution sol = lp::solve(c.prog, options.solver);
  PotentialEval ev;
  ev.subsystem = i;
  ev.status = sol.status;
  ev.solve_seconds = sol.solve_seconds;
  if (sol.status == lp::LpStatus::Error || sol.status == lp::LpStatus::Unbounded)
    throw lp::SolverError("potential of subsystem " + std::to_string(net.subsystems[static_cast<std::size_t>(i)].id) +
                          ": " + lp::to_string(sol.status) + " " + sol.message);
  if (!sol.optimal()) {
    ev.value = std::numeric_limits<double>::infinity();
    return ev;
  }
  ev.value = std::max(0.0, sol.objective_value);
  for (const auto& [k, row] : c.pins) ev.gradient.emplace_back(k, sol.sensitivity(row));
  for (lp::Var d : c.vars.dx) ev.dx.push_back(sol.value(d));
  for (lp::Var d : c.vars.du) ev.du.push_back(sol.value(d));
  ev.solution = read_component(sol, c.vars);
  return ev;
}

std::optional<ViableSolution> satisfy_component(const Network& net, const ContractTemplate& tmpl,
                                                const ContractParams& params, int i, const PotentialOptions& options,
                                                double* solve_seconds) {
  const ComponentLp c = build_component(net, tmpl, params, i, options, true);
  const lp::LpSolution sol = lp::solve(c.prog, options.solver);
  if (solve_seconds) *solve_seconds += sol.solve_seconds;
  if (sol.status == lp::LpStatus::Error)
    throw lp::SolverError("subsystem " + std::to_string(net.subsystems[static_cast<std::size_t>(i)].id) + ": " +
                          sol.message);
  if (!sol.optimal()) return std::nullopt;
  return read_component(sol, c.vars);
}

bool PotentialValue::finite() const {
  for (const auto& c : components)
    if (!c.finite()) return false;
  return true;
}

PotentialValue potential(const Network& net, const ContractTemplate& tmpl, const ContractParams& params,
                         const PotentialOptions& options, int threads) {
  PotentialValue out;
  out.components.resize(static_cast<std::size_t>(net.size()));
  util::parallel_for(
      net.size(),
      [&](int i) { out.components[static_cast<std::size_t>(i)] = potential_component(net, tmpl, params, i, options); },
      threads > 0 ? threads : util::worker_count());
  out.gradient = Eigen::VectorXd::Zero(params.layout.total());
  for (const auto& c : out.components) {
    out.value += c.value;
    out.solve_seconds += c.solve_seconds;
    for (const auto& [k, g] : c.gradient) out.gradient(k) += g;
  }
  return out;
}

// ---------------------------------------------------------------- JSON

io::Json params_to_json(const ContractParams& params, const Network& net) {
  io::Json subs = io::Json::array();
  for (int i = 0; i < net.size(); ++i) {
    io::Json s;
    s["id"] = net.subsystems[static_cast<std::size_t>(i)].id;
    for (Channel ch : {Channel::State, Channel::Input}) {
      io::Json entries = io::Json::array();
      for (int t = 0; t < params.layout.steps(); ++t) {
        const int off = params.layout.offset(i, t, ch);
        if (off < 0) continue;
        const int size = params.layout.size(i, t, ch);
        entries.push_back({{"t", t},
                           {"alpha", io::vector_to_json(params.alpha.segment(off, size))},
                           {"alpha_max", io::vector_to_json(params.alpha_max.segment(off, size))}});
      }
      s[to_string(ch)] = std::move(entries);
    }
    subs.push_back(std::move(s));
  }
  return {{"subsystems", std::move(subs)}};
}

ContractParams params_from_json(const io::Json& j, const ContractTemplate& tmpl, const Network& net) {
  ContractParams p;
  p.layout = ParamLayout(tmpl);
  p.alpha = Eigen::VectorXd::Zero(p.layout.total());
  p.alpha_max = Eigen::VectorXd::Zero(p.layout.total());
  std::vector<bool> seen(static_cast<std::size_t>(p.layout.total()), false);
  for (const auto& s : j.at("subsystems")) {
    const int id = s.at("id").get<int>();
    int i = -1;
    for (int k = 0; k < net.size(); ++k)
      if (net.subsystems[static_cast<std::size_t>(k)].id == id) i = k;
    if (i < 0) throw io::ParseError("params: unknown subsystem id " + std::to_string(id));
    for (Channel ch : {Channel::State, Channel::Input}) {
      if (!s.contains(to_string(ch))) continue;
      for (const auto& e : s.at(to_string(ch))) {
        const int t = e.at("t").get<int>();
        if (t < 0 || t >= p.layout.steps()) throw io::ParseError("params: step out of range");
        const int off = p.layout.offset(i, t, ch);
        const int size = p.layout.size(i, t, ch);
        const Eigen::VectorXd a = io::vector_from_json(e.at("alpha"), "alpha");
        const Eigen::VectorXd amax = io::vector_from_json(e.at("alpha_max"), "alpha_max");
        if (off < 0 || a.size() != size || amax.size() != size)
          throw io::ParseError("params: entry for subsystem " + std::to_string(id) + " t=" + std::to_string(t) +
                               " does not match the template");
        p.alpha.segment(off, size) = a;
        p.alpha_max.segment(off, size) = amax;
        for (int r = 0; r < size; ++r) seen[static_cast<std::size_t>(off + r)] = true;
      }
    }
  }
  for (bool b : seen)
    if (!b) throw io::ParseError("params: missing entries for some active channels");
  return p;
}

}  // namespace csynth::contracts
