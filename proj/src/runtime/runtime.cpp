#include "csynth/runtime/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>

#include "csynth/util/parallel.hpp"

namespace csynth::runtime {

using geom::Zonotope;

DecentralizedController::DecentralizedController(const Network& net, const std::vector<ViableSolution>& solutions,
                                                 double tolerance)
    : solutions_(solutions) {
  if (static_cast<int>(solutions.size()) != net.size())
    throw std::invalid_argument("DecentralizedController: one solution per subsystem expected");
  invariant_ = !solutions.empty() && solutions.front().invariant();
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    const auto& s = solutions[i];
    if (s.invariant() != invariant_) throw std::invalid_argument("DecentralizedController: mixed solution modes");
    if (s.xbar.empty() || s.xbar.front().size() != net.subsystems[i].n)
      throw std::invalid_argument("DecentralizedController: solution dimension mismatch");
    std::vector<geom::PointLocator> locs;
    const int sets = s.invariant() ? 1 : static_cast<int>(s.T.size());
    for (int t = 0; t < sets; ++t) locs.emplace_back(s.omega(t), tolerance);
    locators_.push_back(std::move(locs));
  }
}

geom::PointLocator& DecentralizedController::locator(int i, int t) {
  auto& locs = locators_.at(static_cast<std::size_t>(i));
  const std::size_t k = invariant_ ? 0 : static_cast<std::size_t>(t);
  if (t < 0 || k >= locs.size()) throw std::out_of_range("controller: step beyond horizon");
  return locs[k];
}

std::optional<Eigen::VectorXd> DecentralizedController::input(int i, int t, const Eigen::VectorXd& x_i) {
  const auto& s = solutions_.at(static_cast<std::size_t>(i));
  if (!invariant_ && t >= s.horizon()) throw std::out_of_range("controller: no input at the final step");
  if (!locator(i, t).locate(x_i, witness_)) return std::nullopt;
  const std::size_t k = invariant_ ? 0 : static_cast<std::size_t>(t);
  return Eigen::VectorXd(s.ubar[k] + s.M[k] * witness_);
}

bool DecentralizedController::contains(int i, int t, const Eigen::VectorXd& x_i) {
  return locator(i, t).locate(x_i, witness_);
}

double DecentralizedController::last_witness_norm() const {
  return witness_.size() == 0 ? 0.0 : witness_.lpNorm<Eigen::Infinity>();
}

namespace {

std::vector<Eigen::VectorXd> propagate(const Network& net, int t, const std::vector<Eigen::VectorXd>& states,
                                       const std::vector<Eigen::VectorXd>& inputs,
                                       const std::vector<Eigen::VectorXd>& disturbances) {
  std::vector<Eigen::VectorXd> next(states.size());
  for (int i = 0; i < net.size(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    Eigen::VectorXd x = net.A(i, t) * states[ui] + disturbances[ui];
    if (net.subsystems[ui].m > 0) x += net.B(i, t) * inputs[ui];
    const auto& cps = net.subsystems[ui].couplings;
    for (std::size_t c = 0; c < cps.size(); ++c) {
      const auto j = static_cast<std::size_t>(cps[c].source);
      x += net.coupling_A(i, c, t) * states[j];
      if (net.subsystems[j].m > 0) x += net.coupling_B(i, c, t) * inputs[j];
    }
    next[ui] = std::move(x);
  }
  return next;
}

}  // namespace

StepResult step(const Network& net, DecentralizedController& ctrl, const std::vector<Eigen::VectorXd>& states,
                int t, const std::vector<Eigen::VectorXd>& disturbances) {
  StepResult out;
  out.inputs.resize(states.size());
  for (int i = 0; i < net.size(); ++i) {
    auto u = ctrl.input(i, t, states[static_cast<std::size_t>(i)]);
    if (!u) {
      out.violation = Violation{i, t, "state"};
      return out;
    }
    out.inputs[static_cast<std::size_t>(i)] = std::move(*u);
  }
  out.next = propagate(net, t, states, out.inputs, disturbances);
  return out;
}

Eigen::VectorXd sample_point(const Zonotope& z, const Eigen::VectorXd& zeta) {
  if (zeta.size() != z.num_generators()) throw std::invalid_argument("sample_point: zeta size mismatch");
  if (z.num_generators() == 0) return z.center();
  return z.center() + z.generators() * zeta;
}

Eigen::VectorXd sample_zeta(int p, Sampling mode, std::mt19937_64& rng) {
  Eigen::VectorXd z(p);
  if (mode == Sampling::Uniform) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < p; ++k) z(k) = u(rng);
  } else {
    std::bernoulli_distribution coin(0.5);
    for (int k = 0; k < p; ++k) z(k) = coin(rng) ? 1.0 : -1.0;
  }
  return z;
}

std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t s) {
  // splitmix64 of the pair
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (s + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

int default_steps(const DecentralizedController& ctrl, int steps) {
  if (ctrl.invariant()) return steps > 0 ? steps : 100;
  const int h = ctrl.size() == 0 ? 0 : ctrl.solution(0).horizon();
  if (steps > h) throw std::invalid_argument("simulate: more steps than the horizon");
  return steps > 0 ? steps : h;
}

// Runs one trajectory; `witness` (optional) collects the per-step maximum of
// the witness entries.
Trajectory run(const Network& net, DecentralizedController& ctrl, std::vector<Eigen::VectorXd> x,
               int steps, const std::function<Eigen::VectorXd(int, int)>& disturbance,
               std::vector<double>* witness, bool record = true) {
  const int count = net.size();
  Trajectory tr;
  tr.x.resize(static_cast<std::size_t>(count));
  tr.u.resize(static_cast<std::size_t>(count));
  tr.d.resize(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) tr.x[static_cast<std::size_t>(i)].push_back(x[static_cast<std::size_t>(i)]);
  std::vector<Eigen::VectorXd> d(static_cast<std::size_t>(count));
  for (int t = 0; t < steps; ++t) {
    for (int i = 0; i < count; ++i) d[static_cast<std::size_t>(i)] = disturbance(i, t);
    std::vector<Eigen::VectorXd> inputs(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      auto u = ctrl.input(i, t, x[static_cast<std::size_t>(i)]);
      if (!u) {
        tr.violation = Violation{i, t, "state"};
        return tr;
      }
      if (witness) {
        double& w = (*witness)[static_cast<std::size_t>(t)];
        w = std::max(w, ctrl.last_witness_norm());
      }
      inputs[static_cast<std::size_t>(i)] = std::move(*u);
    }
    std::vector<Eigen::VectorXd> next = propagate(net, t, x, inputs, d);
    for (int i = 0; record && i < count; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      tr.u[ui].push_back(inputs[ui]);
      tr.d[ui].push_back(d[ui]);
      tr.x[ui].push_back(next[ui]);
    }
    x = std::move(next);
  }
  for (int i = 0; i < count; ++i) {
    if (!ctrl.contains(i, steps, x[static_cast<std::size_t>(i)])) {
      tr.violation = Violation{i, steps, "state"};
      return tr;
    }
    if (witness) {
      double& w = (*witness)[static_cast<std::size_t>(steps)];
      w = std::max(w, ctrl.last_witness_norm());
    }
  }
  return tr;
}

}  // namespace

Trajectory simulate(const Network& net, DecentralizedController& ctrl, int steps, std::uint64_t seed,
                    Sampling initial, Sampling disturbance) {
  steps = default_steps(ctrl, steps);
  std::mt19937_64 rng(seed);
  std::vector<Eigen::VectorXd> x0;
  for (int i = 0; i < net.size(); ++i) {
    const Zonotope om = ctrl.solution(i).omega(0);
    x0.push_back(sample_point(om, sample_zeta(om.num_generators(), initial, rng)));
  }
  return run(
      net, ctrl, std::move(x0), steps,
      [&](int i, int t) {
        const Zonotope& d = net.D(i, t);
        return sample_point(d, sample_zeta(d.num_generators(), disturbance, rng));
      },
      nullptr);
}

Trajectory simulate(const Network& net, DecentralizedController& ctrl, const std::vector<Eigen::VectorXd>& x0,
                    const std::vector<std::vector<Eigen::VectorXd>>& disturbances) {
  if (static_cast<int>(x0.size()) != net.size() || static_cast<int>(disturbances.size()) != net.size())
    throw std::invalid_argument("simulate: one entry per subsystem expected");
  const int steps = static_cast<int>(disturbances.front().size());
  return run(
      net, ctrl, x0, default_steps(ctrl, steps),
      [&](int i, int t) { return disturbances[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)]; }, nullptr);
}

VerifyReport verify_invariance(const Network& net, const std::vector<ViableSolution>& solutions,
                               const VerifyOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  VerifyReport rep;
  rep.seed = options.seed;
  rep.samples = std::max(options.samples, 0);
  DecentralizedController probe(net, solutions, options.tolerance);
  rep.steps = default_steps(probe, options.steps);
  rep.max_witness.assign(static_cast<std::size_t>(rep.steps + 1), 0.0);
  if (rep.samples == 0) {
    rep.vacuous = true;
    return rep;
  }
  const int threads = options.threads > 0 ? options.threads : util::worker_count();
  const int chunks = std::min(rep.samples, std::max(1, threads * 4));

  std::vector<std::optional<Violation>> outcome(static_cast<std::size_t>(rep.samples));
  std::vector<std::vector<double>> witness(static_cast<std::size_t>(chunks), rep.max_witness);
  util::parallel_for(
      chunks,
      [&](int c) {
        DecentralizedController ctrl(net, solutions, options.tolerance);
        for (int s = c; s < rep.samples; s += chunks) {
          const Sampling mode = s % 2 == 0 ? Sampling::Uniform : Sampling::Vertex;
          std::mt19937_64 rng(trajectory_seed(options.seed, static_cast<std::uint64_t>(s)));
          std::vector<Eigen::VectorXd> x0;
          for (int i = 0; i < net.size(); ++i) {
            const Zonotope om = solutions[static_cast<std::size_t>(i)].omega(0);
            x0.push_back(sample_point(om, sample_zeta(om.num_generators(), mode, rng)));
          }
          const Trajectory tr = run(
              net, ctrl, std::move(x0), rep.steps,
              [&](int i, int t) {
                const Zonotope& d = net.D(i, t);
                return sample_point(d, sample_zeta(d.num_generators(), mode, rng));
              },
              &witness[static_cast<std::size_t>(c)], false);
          outcome[static_cast<std::size_t>(s)] = tr.violation;
        }
      },
      threads);
  for (const auto& w : witness)
    for (std::size_t t = 0; t < w.size(); ++t) rep.max_witness[t] = std::max(rep.max_witness[t], w[t]);
  for (const auto& o : outcome) {
    if (!o) continue;
    ++rep.violations;
    if (static_cast<int>(rep.examples.size()) < options.keep_violations) rep.examples.push_back(*o);
  }

  // one-step sweep over disturbance vertices from states spread over Omega(t)
  const int sweep_steps = probe.invariant() ? 1 : rep.steps;
  const int states = std::max(options.vertex_states, 0);
  const int jobs = sweep_steps * states;
  std::vector<long long> checks(static_cast<std::size_t>(jobs), 0), bad(static_cast<std::size_t>(jobs), 0);
  const int vchunks = std::max(1, std::min(jobs, threads * 4));
  util::parallel_for(
      jobs == 0 ? 0 : vchunks,
      [&](int c) {
        DecentralizedController ctrl(net, solutions, options.tolerance);
        for (int job = c; job < jobs; job += vchunks) {
          const int t = job / std::max(states, 1);
          std::mt19937_64 rng(trajectory_seed(options.seed ^ 0x5bd1e995ULL, static_cast<std::uint64_t>(job)));
          const Sampling mode = job % 2 == 0 ? Sampling::Uniform : Sampling::Vertex;
          std::vector<Eigen::VectorXd> x;
          for (int i = 0; i < net.size(); ++i) {
            const Zonotope om = solutions[static_cast<std::size_t>(i)].omega(t);
            x.push_back(sample_point(om, sample_zeta(om.num_generators(), mode, rng)));
          }
          std::vector<Eigen::VectorXd> centers;
          for (int i = 0; i < net.size(); ++i) centers.push_back(net.D(i, t).center());
          const StepResult nominal = step(net, ctrl, x, t, centers);
          if (nominal.violation) {
            ++bad[static_cast<std::size_t>(job)];
            continue;
          }
          for (int i = 0; i < net.size(); ++i) {
            const Zonotope& d = net.D(i, t);
            const int p = d.num_generators();
            const bool all = p <= options.vertex_limit;
            const long long count = all ? (1LL << p) : (1LL << options.vertex_limit);
            Eigen::VectorXd zeta(p);
            for (long long v = 0; v < count; ++v) {
              if (all) {
                for (int k = 0; k < p; ++k) zeta(k) = (v >> k) & 1 ? 1.0 : -1.0;
              } else {
                zeta = sample_zeta(p, Sampling::Vertex, rng);
              }
              const Eigen::VectorXd next = nominal.next[static_cast<std::size_t>(i)] + d.generators() * zeta;
              ++checks[static_cast<std::size_t>(job)];
              if (!ctrl.contains(i, t + 1, next)) ++bad[static_cast<std::size_t>(job)];
            }
          }
        }
      },
      threads);
  for (int j = 0; j < jobs; ++j) {
    rep.vertex_checks += checks[static_cast<std::size_t>(j)];
    rep.vertex_violations += bad[static_cast<std::size_t>(j)];
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

io::Json report_to_json(const VerifyReport& report, const Network& net) {
  io::Json ex = io::Json::array();
  for (const auto& v : report.examples)
    ex.push_back({{"id", net.subsystems[static_cast<std::size_t>(v.subsystem)].id}, {"t", v.t}, {"what", v.what}});
  return {{"samples", report.samples},
          {"steps", report.steps},
          {"seed", report.seed},
          {"violations", report.violations},
          {"vertex_checks", report.vertex_checks},
          {"vertex_violations", report.vertex_violations},
          {"vacuous", report.vacuous},
          {"passed", report.passed()},
          {"seconds", report.seconds},
          {"max_witness", report.max_witness},
          {"examples", ex}};
}

void write_trajectory_csv(const Trajectory& traj, const Network& net, const std::filesystem::path& path) {
  int n = 0, m = 0;
  for (const auto& s : net.subsystems) {
    n = std::max(n, s.n);
    m = std::max(m, s.m);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  out << "t,id";
  for (int k = 0; k < n; ++k) out << ",x" << k;
  for (int k = 0; k < m; ++k) out << ",u" << k;
  out << '\n';
  for (std::size_t i = 0; i < traj.x.size(); ++i) {
    for (std::size_t t = 0; t < traj.x[i].size(); ++t) {
      out << t << ',' << net.subsystems[i].id;
      const Eigen::VectorXd& x = traj.x[i][t];
      for (int k = 0; k < n; ++k) {
        out << ',';
        if (k < x.size()) out << x(k);
      }
      for (int k = 0; k < m; ++k) {
        out << ',';
        if (t < traj.u[i].size() && k < traj.u[i][t].size()) out << traj.u[i][t](k);
      }
      out << '\n';
    }
  }
}

}  // namespace csynth::runtime
