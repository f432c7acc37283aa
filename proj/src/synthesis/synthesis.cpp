#include "csynth/synthesis/synthesis.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

#include "csynth/geom/containment.hpp"
#include "csynth/util/parallel.hpp"
#include "csynth/viability/tube.hpp"

namespace csynth::synthesis {

using contracts::Channel;
using contracts::PotentialOptions;
using contracts::PotentialValue;
using geom::Zonotope;
using lp::LinExpr;

const char* to_string(Method m) { return m == Method::Centralized ? "centralized" : "compositional"; }
const char* to_string(Status s) { return s == Status::Correct ? "correct" : "failed"; }

Method method_from_string(const std::string& s) {
  if (s == "centralized") return Method::Centralized;
  if (s == "compositional") return Method::Compositional;
  throw std::invalid_argument("unknown method \"" + s + "\"");
}

Eigen::VectorXd project_box(const Eigen::VectorXd& alpha, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  if (alpha.size() != lo.size() || alpha.size() != hi.size())
    throw std::invalid_argument("project_box: size mismatch");
  return alpha.cwiseMax(lo).cwiseMin(hi);
}

Eigen::VectorXd project_box(const Eigen::VectorXd& alpha, const Eigen::VectorXd& hi) {
  return project_box(alpha, Eigen::VectorXd::Zero(alpha.size()), hi);
}

void DescentConfig::validate() const {
  if (!(step > 0.0)) throw std::invalid_argument("descent step must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("descent tolerance must be positive");
  if (max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  if (reduction_order < 0) throw std::invalid_argument("reduction order must be >= 0");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in [0, 1)");
  for (int v : k)
    if (v < 1) throw std::invalid_argument("k must be >= 1");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Column count of the (reduced) augmented disturbance of subsystem i.
int disturbance_width(const Network& net, const ContractTemplate& tmpl, const contracts::ParamLayout& layout, int i,
                      int order) {
  const int n = net.subsystems[static_cast<std::size_t>(i)].n;
  int widest = 0;
  for (int t = 0; t < net.steps(); ++t) {
    const int q = static_cast<int>(contracts::augmented_columns(net, tmpl, layout, i, t).columns.cols());
    const int p = order == 0 ? q : order == 1 ? n : std::min(q, order * n);
    widest = std::max(widest, p);
  }
  return widest;
}

// k candidates for subsystem i: multiples of n in finite mode, of the
// disturbance width for invariant sets (the shift structure needs k >= p).
std::vector<int> k_candidates(const Network& net, const ContractTemplate& tmpl, const contracts::ParamLayout& layout,
                              int i, int order, int cap_factor) {
  const int base = net.mode == sysmodel::Mode::Finite
                       ? net.subsystems[static_cast<std::size_t>(i)].n
                       : std::max(1, disturbance_width(net, tmpl, layout, i, order));
  std::vector<int> out;
  for (int f = 1; f <= cap_factor; f *= 2) out.push_back(f * base);
  return out;
}

// Min-norm point of the convex hull of the columns of G (Frank-Wolfe with
// exact line search).
Eigen::VectorXd min_norm_combination(const Eigen::MatrixXd& G) {
  const Eigen::MatrixXd Q = G.transpose() * G;
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(G.cols());
  Eigen::Index start = 0;
  Q.diagonal().minCoeff(&start);
  lambda(start) = 1.0;
  for (int it = 0; it < 1000; ++it) {
    const Eigen::VectorXd grad = Q * lambda;
    Eigen::Index j = 0;
    grad.minCoeff(&j);
    Eigen::VectorXd d = -lambda;
    d(j) += 1.0;
    const double gap = -grad.dot(d);
    if (gap <= 1e-14 * std::max(1.0, lambda.dot(grad))) break;
    const double curv = d.dot(Q * d);
    const double step = curv > 0.0 ? std::min(1.0, gap / curv) : 1.0;
    lambda += step * d;
  }
  return G * lambda;
}

std::vector<Zonotope> per_step(const Network& net, int i, bool state) {
  std::vector<Zonotope> out;
  const int count = state && net.mode == sysmodel::Mode::Finite ? net.horizon + 1 : net.steps();
  for (int t = 0; t < count; ++t) out.push_back(state ? net.X(i, t) : net.U(i, t));
  return out;
}

void finish(SynthesisResult& res, const Network& net, const ContractTemplate& tmpl) {
  res.correctness = contracts::check_correctness(net, tmpl, res.params, res.solutions);
  res.guarantees_certified = certify_guarantees(net, res.solutions);
  res.status = res.correctness.correct && res.guarantees_certified ? Status::Correct : Status::Failed;
  if (!res.correct()) {
    res.message = res.correctness.correct ? "guarantee certification failed" : "composition check failed";
    res.hint = "increase-k-or-reduction-order";
  }
}

}  // namespace

bool certify_guarantees(const Network& net, const std::vector<ViableSolution>& solutions) {
  for (int i = 0; i < net.size(); ++i) {
    const auto& s = solutions.at(static_cast<std::size_t>(i));
    std::vector<Zonotope> u = per_step(net, i, false);
    if (net.subsystems[static_cast<std::size_t>(i)].m == 0) u.clear();
    if (u.empty()) {
      // no inputs: only the state sets are checked
      const int states = s.invariant() ? 1 : static_cast<int>(s.T.size());
      for (int t = 0; t < states; ++t)
        if (!geom::containment_lp(s.omega(t), net.X(i, t)).feasible) return false;
      continue;
    }
    if (!viability::certify_guarantees(s, per_step(net, i, true), u)) return false;
  }
  return true;
}

// ---------------------------------------------------------------- centralized

SynthesisResult centralized_synthesize(const Network& net, const ContractTemplate& tmpl,
                                       const CentralizedConfig& cfg) {
  const auto t0 = Clock::now();
  net.validate();
  tmpl.validate(net);
  SynthesisResult res;
  res.method = Method::Centralized;
  res.reduction_order = cfg.reduction_order;
  res.beta = cfg.beta;
  res.finite_mode = cfg.finite_mode;
  res.params = contracts::initial_params(tmpl, net, 0.5);
  const auto& layout = res.params.layout;

  std::vector<std::vector<int>> attempts;
  if (!cfg.k.empty()) {
    attempts.push_back(cfg.k);
  } else {
    std::vector<std::vector<int>> cand;
    for (int i = 0; i < net.size(); ++i)
      cand.push_back(k_candidates(net, tmpl, layout, i, cfg.reduction_order, cfg.k_cap_factor));
    for (std::size_t a = 0; a < cand[0].size(); ++a) {
      std::vector<int> ks;
      for (const auto& c : cand) ks.push_back(c[a]);
      attempts.push_back(ks);
    }
  }

  for (const auto& ks : attempts) {
    PotentialOptions po;
    po.k = ks;
    po.reduction_order = cfg.reduction_order;
    po.finite_mode = cfg.finite_mode;
    po.beta = cfg.beta;
    lp::LinearProgram prog;
    std::vector<lp::Var> alpha;
    LinExpr objective;
    for (int r = 0; r < layout.total(); ++r) {
      alpha.push_back(prog.add_variable("alpha[" + std::to_string(r) + "]", 0.0, res.params.alpha_max(r)));
      if (layout.block_of(r).channel == Channel::State) objective.add(alpha.back(), 1.0);
    }
    const contracts::AlphaExpr alpha_of = [&](int r) { return LinExpr(alpha[static_cast<std::size_t>(r)]); };
    std::vector<contracts::ComponentVars> vars;
    LinExpr unused;
    for (int i = 0; i < net.size(); ++i)
      vars.push_back(contracts::add_component(prog, "s" + std::to_string(net.subsystems[static_cast<std::size_t>(i)].id) +
                                                        "/",
                                              net, tmpl, res.params, i, po, alpha_of, false, unused));
    prog.minimize(objective);
    const lp::LpSolution sol = lp::solve(prog, cfg.solver);
    res.timings.solver_seconds += sol.solve_seconds;
    res.k = ks;
    if (sol.status == lp::LpStatus::TimeLimit) {
      res.message = "time limit reached";
      res.hint = "time-out";
      res.timings.wall_seconds = seconds_since(t0);
      return res;
    }
    if (sol.status == lp::LpStatus::Error) throw lp::SolverError("centralized synthesis: " + sol.message);
    if (!sol.optimal()) continue;
    for (int r = 0; r < layout.total(); ++r)
      res.params.alpha(r) = std::clamp(sol.value(alpha[static_cast<std::size_t>(r)]), 0.0, res.params.alpha_max(r));
    for (const auto& v : vars) res.solutions.push_back(contracts::read_component(sol, v));
    res.potential = 0.0;
    finish(res, net, tmpl);
    res.timings.wall_seconds = seconds_since(t0);
    return res;
  }
  res.message = "centralized program infeasible";
  res.hint = "increase-k";
  res.timings.wall_seconds = seconds_since(t0);
  return res;
}

// ---------------------------------------------------------------- compositional

SynthesisResult compositional_synthesize(const Network& net, const ContractTemplate& tmpl, const DescentConfig& cfg) {
  const auto t0 = Clock::now();
  cfg.validate();
  net.validate();
  tmpl.validate(net);
  SynthesisResult res;
  res.method = Method::Compositional;
  res.reduction_order = cfg.reduction_order;
  res.beta = cfg.beta;
  res.finite_mode = cfg.finite_mode;
  res.params = contracts::initial_params(tmpl, net, cfg.initial_fraction);
  ContractParams& params = res.params;
  if (cfg.random_start) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int r = 0; r < params.alpha.size(); ++r) params.alpha(r) = u(rng) * params.alpha_max(r);
  }
  if (cfg.initial_alpha) params.alpha = project_box(*cfg.initial_alpha, params.alpha_max);
  const int threads = cfg.threads > 0 ? cfg.threads : util::worker_count();

  PotentialOptions po;
  std::vector<contracts::PotentialEval> first;  // auto-k evaluations at the start point
  po.reduction_order = cfg.reduction_order;
  po.finite_mode = cfg.finite_mode;
  po.beta = cfg.beta;
  po.solver = cfg.solver;
  if (!cfg.k.empty()) {
    po.k = cfg.k;
  } else {
    // smallest candidate with a finite potential at the starting point
    po.k.assign(static_cast<std::size_t>(net.size()), 0);
    first.resize(static_cast<std::size_t>(net.size()));
    std::vector<double> secs(static_cast<std::size_t>(net.size()), 0.0);
    util::parallel_for(
        net.size(),
        [&](int i) {
          const auto cand = k_candidates(net, tmpl, params.layout, i, cfg.reduction_order, cfg.k_cap_factor);
          PotentialOptions one = po;
          for (int k : cand) {
            one.k = {k};
            auto ev = contracts::potential_component(net, tmpl, params, i, one);
            secs[static_cast<std::size_t>(i)] += ev.solve_seconds;
            po.k[static_cast<std::size_t>(i)] = k;
            const bool done = ev.finite();
            first[static_cast<std::size_t>(i)] = std::move(ev);
            if (done) break;
          }
        },
        threads);
    for (double s : secs) res.timings.solver_seconds += s;
  }
  res.k = po.k;
  if (po.k.size() == 1 && net.size() > 1) res.k.assign(static_cast<std::size_t>(net.size()), po.k[0]);

  auto eval = [&](const Eigen::VectorXd& a) {
    ContractParams p = params;
    p.alpha = a;
    PotentialValue v = contracts::potential(net, tmpl, p, po, threads);
    res.timings.solver_seconds += v.solve_seconds;
    return v;
  };
  // Subgradients at alpha and at nearby random points, with the components
  // pushing out of the box removed; returns the min-norm convex combination.
  auto sampled_direction = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& g0, double radius, int iter,
                               int round) {
    const int dim = static_cast<int>(a.size());
    const int count = cfg.sampling_points > 0 ? cfg.sampling_points : std::min(dim, 16) + 1;
    std::mt19937_64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(iter * 8 + round + 1)));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Eigen::VectorXd> pts;
    for (int s = 0; s < count; ++s) {
      Eigen::VectorXd p = a;
      for (int r = 0; r < dim; ++r) p(r) += radius * params.alpha_max(r) * u(rng);
      pts.push_back(project_box(p, params.alpha_max));
    }
    Eigen::MatrixXd G(dim, count + 1);
    G.col(0) = g0;
    for (int s = 0; s < count; ++s) {
      PotentialValue v = eval(pts[static_cast<std::size_t>(s)]);
      G.col(s + 1) = v.finite() ? v.gradient : g0;
    }
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c <= count; ++c)
        if ((a(r) <= 0.0 && G(r, c) > 0.0) || (a(r) >= params.alpha_max(r) && G(r, c) < 0.0)) G(r, c) = 0.0;
    return min_norm_combination(G);
  };
  auto extract = [&](const PotentialValue& at) {
    // zero slack everywhere: the potential programs already hold the tubes
    bool exact = true;
    for (const auto& c : at.components) exact = exact && c.value <= 1e-12 && c.solution.has_value();
    if (exact) {
      res.solutions.clear();
      for (const auto& c : at.components) res.solutions.push_back(*c.solution);
      finish(res, net, tmpl);
      if (res.correct()) return true;
    }
    std::vector<std::optional<ViableSolution>> sols(static_cast<std::size_t>(net.size()));
    std::vector<double> secs(static_cast<std::size_t>(net.size()), 0.0);
    util::parallel_for(
        net.size(),
        [&](int i) {
          sols[static_cast<std::size_t>(i)] =
              contracts::satisfy_component(net, tmpl, params, i, po, &secs[static_cast<std::size_t>(i)]);
        },
        threads);
    for (double s : secs) res.timings.solver_seconds += s;
    res.solutions.clear();
    for (auto& s : sols) {
      if (!s) {
        res.solutions.clear();
        return false;
      }
      res.solutions.push_back(std::move(*s));
    }
    finish(res, net, tmpl);
    return res.correct();
  };

  Eigen::VectorXd alpha = params.alpha;
  PotentialValue pv;
  if (first.empty()) {
    pv = eval(alpha);
  } else {
    pv.gradient = Eigen::VectorXd::Zero(params.layout.total());
    for (auto& c : first) {
      pv.value += c.value;
      pv.solve_seconds += c.solve_seconds;
      for (const auto& [k, g] : c.gradient) pv.gradient(k) += g;
    }
    pv.components = std::move(first);
  }
  double accepted_step = 0.0;
  bool extracted_here = false;
  int iter = 0;
  for (;; ++iter) {
    res.trace.push_back({iter, pv.value, pv.gradient.norm(), accepted_step, pv.solve_seconds});
    res.potential = pv.value;
    params.alpha = alpha;
    if (pv.finite() && pv.value <= cfg.tol && !extracted_here) {
      extracted_here = true;
      if (extract(pv)) break;
    }
    if (iter >= cfg.max_iters) {
      res.message = "iteration limit reached with V = " + std::to_string(pv.value);
      break;
    }
    if (!pv.finite()) {
      res.message = "potential is infinite at the current parameters";
      break;
    }
    if (seconds_since(t0) > cfg.time_budget_seconds) {
      res.message = "time limit reached with V = " + std::to_string(pv.value);
      res.hint = "time-out";
      break;
    }
    auto search = [&](const Eigen::VectorXd& dir) {
      double delta = cfg.step;
      for (int h = 0; h <= cfg.max_halvings; ++h, delta *= 0.5) {
        const Eigen::VectorXd cand = project_box(alpha - delta * dir, params.alpha_max);
        const Eigen::VectorXd diff = alpha - cand;
        if (diff.lpNorm<Eigen::Infinity>() == 0.0) return false;
        PotentialValue pc = eval(cand);
        if (!cfg.line_search || (pc.finite() && pc.value <= pv.value - cfg.armijo * dir.dot(diff))) {
          alpha = cand;
          pv = std::move(pc);
          accepted_step = delta;
          return true;
        }
      }
      return false;
    };
    bool moved = false;
    if (cfg.polyak_trial && cfg.line_search && pv.gradient.squaredNorm() > 0.0) {
      const double delta = pv.value / pv.gradient.squaredNorm();
      const Eigen::VectorXd cand = project_box(alpha - delta * pv.gradient, params.alpha_max);
      const Eigen::VectorXd diff = alpha - cand;
      if (delta < cfg.step && diff.lpNorm<Eigen::Infinity>() > 0.0) {
        PotentialValue pc = eval(cand);
        if (pc.finite() && pc.value <= pv.value - cfg.armijo * pv.gradient.dot(diff)) {
          alpha = cand;
          pv = std::move(pc);
          accepted_step = delta;
          moved = true;
        }
      }
    }
    if (!moved) moved = search(pv.gradient);
    // V is piecewise linear: at a kink the returned subgradient need not be a
    // descent direction, so fall back to the shortest combination of nearby ones
    for (int s = 0; !moved && cfg.line_search && s < cfg.sampling_rounds; ++s) {
      const double radius = cfg.sampling_radius * std::pow(0.1, s);
      const Eigen::VectorXd dir = sampled_direction(alpha, pv.gradient, radius, iter, s);
      if (dir.norm() <= 1e-12) break;
      moved = search(dir);
    }
    if (!moved) {
      res.message = "descent stalled at V = " + std::to_string(pv.value);
      break;
    }
    extracted_here = false;
  }
  res.iterations = iter;
  params.alpha = alpha;
  if (!res.correct()) {
    res.status = Status::Failed;
    res.solutions.clear();
    if (res.hint.empty()) res.hint = "increase-k-or-reduction-order";
    if (res.message.empty()) res.message = "no certified composition found";
  } else {
    res.message.clear();
    res.hint.clear();
  }
  res.timings.wall_seconds = seconds_since(t0);
  return res;
}

// ---------------------------------------------------------------- dense baseline

DenseResult centralized_dense(const Network& net, int k, const lp::SolverOptions& solver) {
  const auto t0 = Clock::now();
  if (net.mode != sysmodel::Mode::Infinite) throw std::invalid_argument("centralized_dense: infinite mode only");
  const int n = net.total_state_dim();
  const int m = net.total_input_dim();
  viability::InvariantProblem prob;
  prob.A = net.aggregated_A(0);
  prob.B = net.aggregated_B(0);
  auto stack = [&](auto get, int dim) {
    int cols = 0;
    for (int i = 0; i < net.size(); ++i) cols += get(i).num_generators();
    Eigen::VectorXd c(dim);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim, cols);
    int r = 0, col = 0;
    for (int i = 0; i < net.size(); ++i) {
      const Zonotope& z = get(i);
      c.segment(r, z.dim()) = z.center();
      g.block(r, col, z.dim(), z.num_generators()) = z.generators();
      r += z.dim();
      col += z.num_generators();
    }
    return Zonotope(c, g);
  };
  prob.W = stack([&](int i) -> const Zonotope& { return net.D(i, 0); }, n);
  prob.X = stack([&](int i) -> const Zonotope& { return net.X(i, 0); }, n);
  prob.U = stack([&](int i) -> const Zonotope& { return net.U(i, 0); }, m);

  DenseResult out;
  std::vector<int> ks;
  if (k > 0) ks = {k};
  else
    for (int f = 1; f <= 8; f *= 2) ks.push_back(f * prob.W.num_generators());
  for (int kk : ks) {
    lp::SolverOptions s = solver;
    if (std::isfinite(solver.time_limit_seconds))
      s.time_limit_seconds = std::max(1e-3, solver.time_limit_seconds - out.solver_seconds);
    const auto r = viability::rci(prob, kk, 0.0, true, s);
    out.solver_seconds += r.solve_seconds;
    out.k = kk;
    if (r.status == lp::LpStatus::TimeLimit) {
      out.time_limit_reached = true;
      break;
    }
    if (r.feasible()) {
      out.feasible = true;
      break;
    }
  }
  out.wall_seconds = seconds_since(t0);
  return out;
}

// ---------------------------------------------------------------- result directory

void write_result(const SynthesisResult& result, const Network& net, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::write_json_file(dir / "params.json", contracts::params_to_json(result.params, net));
  for (std::size_t i = 0; i < result.solutions.size(); ++i) {
    io::Json j = viability::solution_to_json(result.solutions[i]);
    j["id"] = net.subsystems[i].id;
    io::write_json_file(dir / ("solution_" + std::to_string(net.subsystems[i].id) + ".json"), j);
  }
  {
    std::ofstream trace(dir / "trace.csv");
    trace << "iteration,V,grad_norm,step,solve_seconds\n";
    trace.precision(17);
    for (const auto& e : result.trace)
      trace << e.iteration << ',' << e.value << ',' << e.grad_norm << ',' << e.step << ',' << e.solve_seconds << '\n';
  }
  io::Json margins = io::Json::array();
  for (const auto& m : result.correctness.margins)
    margins.push_back({{"id", net.subsystems[static_cast<std::size_t>(m.subsystem)].id},
                       {"t", m.t},
                       {"channel", contracts::to_string(m.channel)},
                       {"margin", m.margin},
                       {"certified", m.certified}});
  io::Json report = {{"status", to_string(result.status)},
                     {"method", to_string(result.method)},
                     {"mode", sysmodel::to_string(net.mode)},
                     {"potential", std::isfinite(result.potential) ? io::Json(result.potential) : io::Json(nullptr)},
                     {"iterations", result.iterations},
                     {"k", result.k},
                     {"reduction_order", result.reduction_order},
                     {"beta", result.beta},
                     {"finite_mode", viability::to_string(result.finite_mode)},
                     {"guarantees_certified", result.guarantees_certified},
                     {"composition_correct", result.correctness.correct && !result.solutions.empty()},
                     {"timings", {{"solver_seconds", result.timings.solver_seconds},
                                  {"wall_seconds", result.timings.wall_seconds}}},
                     {"margins", margins}};
  if (!result.hint.empty()) report["hint"] = result.hint;
  if (!result.message.empty()) report["message"] = result.message;
  io::write_json_file(dir / "report.json", report);
}

SynthesisResult read_result(const std::filesystem::path& dir, const Network& net, const ContractTemplate& tmpl) {
  SynthesisResult res;
  const io::Json report = io::read_json_file(dir / "report.json");
  res.status = report.at("status").get<std::string>() == "correct" ? Status::Correct : Status::Failed;
  res.method = method_from_string(report.at("method").get<std::string>());
  res.potential = report.at("potential").is_null() ? std::numeric_limits<double>::infinity()
                                                    : report.at("potential").get<double>();
  res.iterations = report.value("iterations", 0);
  res.k = report.value("k", std::vector<int>{});
  res.reduction_order = report.value("reduction_order", 0);
  res.beta = report.value("beta", 0.0);
  res.finite_mode = viability::tube_mode_from_string(report.value("finite_mode", std::string("growing")));
  res.hint = report.value("hint", std::string());
  res.message = report.value("message", std::string());
  res.params = contracts::params_from_json(io::read_json_file(dir / "params.json"), tmpl, net);
  for (const auto& s : net.subsystems) {
    const auto path = dir / ("solution_" + std::to_string(s.id) + ".json");
    if (!std::filesystem::exists(path)) {
      res.solutions.clear();
      break;
    }
    res.solutions.push_back(viability::solution_from_json(io::read_json_file(path)));
  }
  return res;
}

}  // namespace csynth::synthesis
