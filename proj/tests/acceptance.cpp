// End-to-end acceptance checks. One PASS/FAIL line per criterion; exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "csynth/contracts/contracts.hpp"
#include "csynth/geom/containment.hpp"
#include "csynth/geom/zonotope.hpp"
#include "csynth/io/json.hpp"
#include "csynth/lp/linear_program.hpp"
#include "csynth/runtime/runtime.hpp"
#include "csynth/synthesis/synthesis.hpp"
#include "csynth/sysmodel/network.hpp"
#include "oracles.hpp"
#include "test_networks.hpp"

using namespace csynth;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using geom::Zonotope;
using sysmodel::Network;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

Network load_config(const std::string& name, io::Json* synthesis_section) {
  io::Json j = io::read_json_file(std::string(CSYNTH_SOURCE_DIR) + "/configs/" + name);
  if (synthesis_section) *synthesis_section = j.value("synthesis", io::Json::object());
  j.erase("synthesis");
  return sysmodel::network_from_json(j);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------- 1

Outcome case1() {
  const auto t0 = Clock::now();
  io::Json s;
  const Network net = load_config("case1.json", &s);
  const auto tmpl = contracts::default_template(net);
  synthesis::DescentConfig cfg;
  cfg.k = {s.at("k").get<int>()};
  cfg.reduction_order = s.at("reduce_order").get<int>();
  cfg.max_iters = s.at("max_iter").get<int>();
  cfg.tol = s.at("tol").get<double>();
  cfg.step = s.at("step").get<double>();
  const auto res = synthesis::compositional_synthesize(net, tmpl, cfg);
  Outcome o;
  o.detail = "V=" + fmt(res.potential) + " after " + std::to_string(res.iterations) + " iterations";
  if (!res.correct() || !res.correctness.correct || res.potential > 1e-6 || res.iterations > 500) {
    o.detail += ", synthesis " + std::string(synthesis::to_string(res.status));
    return o;
  }
  runtime::VerifyOptions vo;
  vo.samples = 10000;
  vo.steps = 1000;
  vo.seed = 1;
  const auto rep = runtime::verify_invariance(net, res.solutions, vo);
  const double secs = seconds_since(t0);
  o.detail += ", " + std::to_string(rep.samples) + "x" + std::to_string(rep.steps) + " Monte Carlo: " +
              std::to_string(rep.violations + rep.vertex_violations) + " violations, " + fmt(secs) + " s";
  o.pass = rep.passed() && !rep.vacuous && secs < 60.0;
  return o;
}

// ---------------------------------------------------------------- 2

Outcome case2() {
  const auto t0 = Clock::now();
  const Network net = load_config("case2.json", nullptr);
  const auto tmpl = contracts::default_template(net);
  const auto res = synthesis::centralized_synthesize(net, tmpl);
  Outcome o;
  if (!res.correct()) {
    o.detail = "centralized synthesis failed: " + res.message;
    return o;
  }
  int certified = 0;
  int total = 0;
  double point_norm = 0.0;
  for (int i = 0; i < net.size(); ++i) {
    const auto& sol = res.solutions[static_cast<std::size_t>(i)];
    for (int t = 0; t <= net.horizon; ++t) {
      ++total;
      if (geom::containment_lp(sol.omega(t), net.X(i, t)).feasible) ++certified;
    }
    point_norm = std::max(point_norm, sol.omega(0).generators().norm());
  }
  const double secs = seconds_since(t0);
  o.detail = std::to_string(certified) + "/" + std::to_string(total) + " sets certified, max |G(Omega_i(0))|=" +
             fmt(point_norm) + ", " + fmt(secs) + " s";
  o.pass = certified == total && point_norm <= 1e-6 && secs < 120.0;
  return o;
}

// ---------------------------------------------------------------- 3

double median_solver_seconds(const std::function<double()>& run, int repeats) {
  std::vector<double> t;
  for (int r = 0; r < repeats; ++r) t.push_back(run());
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

Outcome scaling() {
  const std::vector<int> dims = {10, 20, 40, 100};
  const std::vector<double> lambdas = {1.0, 0.1, 0.1, 0.1};
  const std::uint64_t seed = 1;
  Outcome o;
  bool all_ok = true;
  std::vector<double> xs, ys;
  std::string sizes;
  for (std::size_t s = 0; s < dims.size(); ++s) {
    const Network net = sysmodel::random_network(dims[s] / 2, lambdas[s], seed);
    const auto tmpl = contracts::default_template(net);
    const auto res = synthesis::compositional_synthesize(net, tmpl);
    all_ok = all_ok && res.correct();
    double per = 0.0;
    for (const auto& e : res.trace) per += e.solve_seconds;
    per /= static_cast<double>(std::max<std::size_t>(1, res.trace.size()));
    xs.push_back(std::log(static_cast<double>(net.size())));
    ys.push_back(std::log(per));
    sizes += (s ? "," : "") + std::to_string(dims[s]) + (res.correct() ? ":ok" : ":failed");
  }
  // least-squares slope of log(per-iteration time) against log(subsystems)
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  const double slope = sxy / sxx;

  const Network small = sysmodel::random_network(5, 1.0, seed);
  const auto tmpl = contracts::default_template(small);
  const double comp = median_solver_seconds(
      [&] { return synthesis::compositional_synthesize(small, tmpl).timings.solver_seconds; }, 5);
  const double cent = median_solver_seconds(
      [&] { return synthesis::centralized_synthesize(small, tmpl).timings.solver_seconds; }, 5);
  const double dense =
      median_solver_seconds([&] { return synthesis::centralized_dense(small).solver_seconds; }, 5);
  const bool order = comp < cent && cent < dense;

  o.detail = "(a) " + sizes + "; (b) size 10 solver s: compositional " + fmt(comp) +
             ", centralized-decentralized " + fmt(cent) + ", centralized-dense " + fmt(dense) +
             (order ? "" : " [ordering not met]") + "; (c) per-iteration exponent " + fmt(slope);
  o.pass = all_ok && order && slope <= 1.5;
  return o;
}

// ---------------------------------------------------------------- 4, 5

struct Instance {
  Network net;
  contracts::ContractTemplate tmpl;
  contracts::ContractParams params;
  contracts::PotentialOptions options;
};

Instance random_instance(std::mt19937_64& rng, int index) {
  std::uniform_real_distribution<double> lam(0.2, 1.5);
  Instance in;
  in.net = testnet::random_small(rng, 1 + index % 3, lam(rng));
  const bool finite = index % 4 == 3;
  if (finite) in.net = testnet::as_finite(in.net, 2 + index % 2);
  in.tmpl = contracts::default_template(in.net);
  in.params = contracts::initial_params(in.tmpl, in.net);
  in.options.k = {finite ? 2 : 8};
  in.options.reduction_order = 1;
  return in;
}

VectorXd random_alpha(std::mt19937_64& rng, const contracts::ContractParams& p, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  VectorXd a(p.alpha.size());
  for (int k = 0; k < a.size(); ++k) a(k) = u(rng) * p.alpha_max(k);
  return a;
}

double potential_at(Instance& in, const VectorXd& alpha) {
  in.params.alpha = alpha;
  return contracts::potential(in.net, in.tmpl, in.params, in.options, 1).value;
}

Outcome gradients() {
  std::mt19937_64 rng(4);
  int instances = 0, total = 0, good = 0, draws = 0;
  while (instances < 50 && draws < 500) {
    Instance in = random_instance(rng, draws++);
    if (in.params.alpha.size() == 0) continue;
    const VectorXd a = random_alpha(rng, in.params, 0.05, 0.95);
    in.params.alpha = a;
    const auto v = contracts::potential(in.net, in.tmpl, in.params, in.options, 1);
    if (!v.finite()) continue;
    ++instances;
    const double eps = 1e-5;
    for (int k = 0; k < a.size(); ++k) {
      VectorXd ap = a, am = a;
      ap(k) += eps;
      am(k) -= eps;
      const double fd = (potential_at(in, ap) - potential_at(in, am)) / (2 * eps);
      const double scale = std::max(std::abs(fd), std::abs(v.gradient(k)));
      ++total;
      if (scale < 1e-8 || std::abs(fd - v.gradient(k)) <= 1e-3 * scale) ++good;
    }
  }
  Outcome o;
  o.detail = std::to_string(good) + "/" + std::to_string(total) + " coordinates within 1e-3 relative error on " +
             std::to_string(instances) + " instances";
  o.pass = instances == 50 && total > 0 && good >= 0.95 * total;
  return o;
}

Outcome convexity() {
  std::mt19937_64 rng(5);
  int instances = 0, draws = 0;
  double worst = 0.0;
  while (instances < 30 && draws < 300) {
    Instance in = random_instance(rng, draws++);
    if (in.params.alpha.size() == 0) continue;
    const VectorXd a = random_alpha(rng, in.params, 0.0, 1.0);
    const VectorXd b = random_alpha(rng, in.params, 0.0, 1.0);
    std::vector<double> v;
    for (int s = 0; s <= 10; ++s) v.push_back(potential_at(in, a + (b - a) * (s / 10.0)));
    if (!std::isfinite(v.front()) || !std::isfinite(v.back())) continue;
    ++instances;
    for (int s = 1; s < 10; ++s) worst = std::max(worst, v[static_cast<std::size_t>(s)] - (v[0] + (v[10] - v[0]) * (s / 10.0)));
  }
  Outcome o;
  o.detail = "largest chord violation " + fmt(worst) + " over " + std::to_string(instances) + " segments";
  o.pass = instances == 30 && worst <= 1e-6;
  return o;
}

// ---------------------------------------------------------------- 6

Outcome oracles() {
  std::mt19937_64 rng(6);
  // containment certificates against sampling
  int certified = 0, unsound = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Zonotope outer = oracle::random_zonotope(rng, 2, 2 + trial % 4, 1.0);
    Zonotope inner = oracle::random_zonotope(rng, 2, 1 + trial % 4, 0.4);
    inner = Zonotope(outer.center() + 0.2 * (inner.center() - outer.center()), inner.generators());
    if (!geom::containment_lp(inner, outer).feasible) continue;
    ++certified;
    for (int s = 0; s < 1000; ++s) {
      const VectorXd x = inner.point(oracle::random_zeta(rng, inner.num_generators()));
      if (!oracle::zonogon_contains(outer, Eigen::Vector2d(x(0), x(1)), 1e-7)) {
        ++unsound;
        break;
      }
    }
  }
  // directed Hausdorff distance against the grid oracle
  double hd_err = 0.0;
  bool hd_ok = true;
  for (int trial = 0; trial < 40; ++trial) {
    const bool one_d = trial % 2 == 0;
    const int n = one_d ? 1 : 2;
    Zonotope outer = oracle::random_zonotope(rng, n, 2);
    if (!one_d) outer = Zonotope(outer.center(), oracle::random_matrix(rng, 2, 2) + 1.5 * MatrixXd::Identity(2, 2));
    const Zonotope inner = oracle::random_zonotope(rng, n, one_d ? 3 : 2, 1.5);
    const int grid = one_d ? 201 : 11;
    const double err = std::abs(geom::directed_hausdorff(outer, inner) - oracle::hausdorff_grid(outer, inner, grid));
    hd_err = std::max(hd_err, err);
    hd_ok = hd_ok && err <= std::max(1e-4, 2.0 / (grid - 1));
  }
  // box order reduction against the interval hull
  bool box_ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    const Zonotope z = oracle::random_zonotope(rng, 3, 6);
    const Zonotope b = geom::order_reduce_box(z);
    MatrixXd hull = MatrixXd::Zero(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 6; ++k) hull(i, i) += std::abs(z.generators()(i, k));
    box_ok = box_ok && b.generators() == hull && b.center() == z.center();
  }
  // LP solves against vertex enumeration
  int lp_ok = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 4;
    const int cuts = 3 + trial % 3;
    MatrixXd a = MatrixXd::Zero(2 * n + cuts, n);
    VectorXd b = VectorXd::Zero(2 * n + cuts);
    for (int k = 0; k < n; ++k) {
      a(2 * k, k) = 1.0;
      a(2 * k + 1, k) = -1.0;
      b(2 * k) = b(2 * k + 1) = 5.0;
    }
    std::uniform_real_distribution<double> u(0.5, 3.0);
    a.bottomRows(cuts) = oracle::random_matrix(rng, cuts, n);
    for (int q = 0; q < cuts; ++q) b(2 * n + q) = u(rng);
    const VectorXd c = oracle::random_matrix(rng, n, 1).col(0);
    lp::LinearProgram prog;
    const lp::VarBlock x = prog.add_variables("x", n, 1, -lp::kInf, lp::kInf);
    for (int q = 0; q < a.rows(); ++q) {
      lp::LinExpr e;
      for (int k = 0; k < n; ++k) e.add(x(k, 0), a(q, k));
      prog.add_constraint("r" + std::to_string(q), e, lp::Sense::LessEqual, b(q));
    }
    lp::LinExpr obj;
    for (int k = 0; k < n; ++k) obj.add(x(k, 0), c(k));
    prog.minimize(obj);
    const auto sol = lp::solve(prog);
    const auto ref = oracle::lp_vertex_enumeration(a, b, c);
    if (ref && sol.optimal() && std::abs(sol.objective_value - *ref) <= 1e-9 * std::max(1.0, std::abs(*ref))) ++lp_ok;
  }
  Outcome o;
  o.detail = std::to_string(unsound) + " unsound of " + std::to_string(certified) +
             " certificates; Hausdorff max error " + fmt(hd_err) + "; interval hull " + (box_ok ? "exact" : "wrong") +
             "; LP " + std::to_string(lp_ok) + "/20";
  o.pass = certified >= 10 && unsound == 0 && hd_ok && box_ok && lp_ok == 20;
  return o;
}

// ---------------------------------------------------------------- 7

Outcome agreement() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lam(0.2, 2.0);
  int central_ok = 0, implied = 0, verified = 0, correct = 0;
  for (int inst = 0; inst < 20; ++inst) {
    Network net = testnet::random_small(rng, 2 + inst % 2, lam(rng));
    const bool finite = inst % 4 == 3;
    if (finite) net = testnet::as_finite(net, 3);
    const auto tmpl = contracts::default_template(net);
    const int k = finite ? 2 : 8;
    synthesis::CentralizedConfig cc;
    cc.k = {k};
    cc.reduction_order = 1;
    const auto cen = synthesis::centralized_synthesize(net, tmpl, cc);
    synthesis::DescentConfig dc;
    dc.k = {k};
    dc.reduction_order = 1;
    const auto comp = synthesis::compositional_synthesize(net, tmpl, dc);
    if (cen.correct()) {
      ++central_ok;
      if (comp.potential <= 1e-5) ++implied;
    }
    for (const auto* r : {&cen, &comp}) {
      if (!r->correct()) continue;
      ++correct;
      runtime::VerifyOptions vo;
      vo.samples = 300;
      vo.steps = finite ? 0 : 100;
      vo.seed = static_cast<std::uint64_t>(inst);
      if (runtime::verify_invariance(net, r->solutions, vo).passed()) ++verified;
    }
  }
  Outcome o;
  o.detail = "centralized feasible on " + std::to_string(central_ok) + "/20, compositional V*<=1e-5 on " +
             std::to_string(implied) + " of those; " + std::to_string(verified) + "/" + std::to_string(correct) +
             " correct results verified";
  o.pass = implied == central_ok && verified == correct && correct > 0;
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 case 1 compositional invariant synthesis", case1},
      {"2 case 2 centralized finite-horizon synthesis", case2},
      {"3 random network scaling", scaling},
      {"4 dual gradients vs finite differences", gradients},
      {"5 potential convexity along segments", convexity},
      {"6 geometry and LP oracles", oracles},
      {"7 centralized and compositional agreement", agreement},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("[%s] criterion %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
