#include <doctest.h>

#include <filesystem>
#include <random>

#include "csynth/runtime/runtime.hpp"
#include "csynth/synthesis/synthesis.hpp"
#include "test_networks.hpp"
#include "test_util.hpp"

using namespace csynth::synthesis;
using csynth::contracts::default_template;
using csynth::contracts::PotentialOptions;
using csynth::sysmodel::Mode;
using Eigen::VectorXd;
using testutil::mat;
using testutil::scalar;
using testutil::vec;

namespace {

// two scalar integrators x+ = x + u + d, |x| <= 1, |u| <= 1, |d| <= 0.1
Network two_scalars(double coupling) {
  Network net;
  net.mode = Mode::Infinite;
  for (int i = 0; i < 2; ++i)
    net.subsystems.push_back(testnet::subsystem(i, scalar(1.0), scalar(1.0), testnet::box(vec({1.0})),
                                                testnet::box(vec({1.0})), testnet::box(vec({0.1}))));
  testnet::couple(net, 0, 1, scalar(coupling), scalar(0.0));
  testnet::couple(net, 1, 0, scalar(coupling), scalar(0.0));
  return net;
}

bool non_increasing(const std::vector<TraceEntry>& trace) {
  for (std::size_t k = 1; k < trace.size(); ++k)
    if (trace[k].value > trace[k - 1].value + 1e-12) return false;
  return true;
}

}  // namespace

TEST_CASE("project_box clamps element-wise") {
  const VectorXd hi = vec({1.0, 2.0, 3.0});
  CHECK(project_box(vec({0.5, 1.0, 2.0}), hi).isApprox(vec({0.5, 1.0, 2.0})));
  CHECK(project_box(vec({-0.3, 1.0, 2.0}), hi)(0) == 0.0);
  CHECK(project_box(vec({0.5, 3.0, 2.0}), hi)(1) == 2.0);
  CHECK(project_box(vec({0.5, 3.0, 2.0}), vec({1.0, 1.0, 1.0}), vec({2.0, 2.0, 2.0}))(0) == 1.0);
  CHECK_THROWS_AS(project_box(vec({0.5}), hi), std::invalid_argument);
}

TEST_CASE("config validation and names") {
  DescentConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.step = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.tol = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.k = {0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(method_from_string("centralized") == Method::Centralized);
  CHECK(method_from_string("compositional") == Method::Compositional);
  CHECK_THROWS(method_from_string("dense"));
  CHECK(std::string(to_string(Status::Correct)) == "correct");
}

TEST_CASE("decoupled network") {
  const Network net = two_scalars(0.0);
  const auto tmpl = default_template(net);

  SUBCASE("potential is zero anywhere in the box") {
    const auto params = csynth::contracts::initial_params(tmpl, net);
    // zero couplings leave every channel inactive
    CHECK(params.alpha.size() == 0);
    CHECK(csynth::contracts::potential(net, tmpl, params).value == doctest::Approx(0.0));
  }
  SUBCASE("both methods succeed at once") {
    const auto c = centralized_synthesize(net, tmpl);
    CHECK(c.correct());
    const auto r = compositional_synthesize(net, tmpl);
    CHECK(r.correct());
    CHECK(r.iterations == 0);
  }
}

TEST_CASE("coupled scalars: zero potential at random alpha above the disturbance width") {
  const Network net = two_scalars(0.01);
  const auto tmpl = default_template(net);
  auto params = csynth::contracts::initial_params(tmpl, net);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  PotentialOptions po;
  po.k = {2};
  for (int rep = 0; rep < 10; ++rep) {
    for (int r = 0; r < params.alpha.size(); ++r) params.alpha(r) = u(rng) * params.alpha_max(r);
    CHECK(csynth::contracts::potential(net, tmpl, params, po).value == doctest::Approx(0.0).epsilon(1e-7));
  }
}

TEST_CASE("unsatisfiable instance fails with a retry hint") {
  Network net = two_scalars(0.5);
  for (auto& s : net.subsystems) s.d_set = {testnet::box(vec({5.0}))};
  const auto tmpl = default_template(net);
  DescentConfig cfg;
  cfg.max_iters = 20;
  const auto r = compositional_synthesize(net, tmpl, cfg);
  CHECK_FALSE(r.correct());
  CHECK(r.solutions.empty());
  CHECK(r.hint.find("increase-k") != std::string::npos);
  const auto c = centralized_synthesize(net, tmpl);
  CHECK_FALSE(c.correct());
  CHECK(c.hint == "increase-k");
}

TEST_CASE("three coupled double integrators") {
  const Network net = testnet::three_coupled();
  const auto tmpl = default_template(net);
  DescentConfig cfg;
  cfg.k = {8};
  const auto r = compositional_synthesize(net, tmpl, cfg);
  REQUIRE(r.correct());
  CHECK(r.potential <= 1e-6);
  CHECK(r.iterations <= 500);
  CHECK(non_increasing(r.trace));
  CHECK(r.correctness.correct);
  CHECK(r.guarantees_certified);
  CHECK(r.trace.front().value > 1.0);
  for (int k = 0; k < r.params.alpha.size(); ++k) {
    CHECK(r.params.alpha(k) >= 0.0);
    CHECK(r.params.alpha(k) <= r.params.alpha_max(k));
  }

  csynth::runtime::VerifyOptions vo;
  vo.samples = 400;
  vo.steps = 100;
  vo.seed = 11;
  const auto rep = csynth::runtime::verify_invariance(net, r.solutions, vo);
  CHECK(rep.passed());
  CHECK(rep.vertex_checks > 0);

  SUBCASE("restart inside the correct region") {
    DescentConfig again = cfg;
    again.initial_alpha = r.params.alpha;
    const auto r2 = compositional_synthesize(net, tmpl, again);
    CHECK(r2.correct());
    CHECK(r2.iterations <= 1);
  }
  SUBCASE("polyak trial steps") {
    DescentConfig pol = cfg;
    pol.polyak_trial = true;
    const auto r2 = compositional_synthesize(net, tmpl, pol);
    REQUIRE(r2.correct());
    CHECK(r2.potential <= 1e-6);
    CHECK(non_increasing(r2.trace));
    CHECK(r2.iterations <= r.iterations);
  }
  SUBCASE("centralized is correct and its alpha has zero potential") {
    CentralizedConfig cc;
    cc.k = {8};
    cc.reduction_order = 1;
    const auto c = centralized_synthesize(net, tmpl, cc);
    REQUIRE(c.correct());
    PotentialOptions po;
    po.k = {8};
    CHECK(csynth::contracts::potential(net, tmpl, c.params, po).value <= 1e-7);
    CHECK(csynth::runtime::verify_invariance(net, c.solutions, vo).passed());
  }
}

TEST_CASE("finite horizon, both methods") {
  Network net = testnet::as_finite(testnet::three_coupled(0.02), 4);
  const auto tmpl = default_template(net);
  const auto c = centralized_synthesize(net, tmpl);
  REQUIRE(c.correct());
  REQUIRE(c.solutions.size() == 3);
  CHECK(c.solutions[0].horizon() == 4);
  // minimal-volume objective: the first viable set collapses to a point
  for (const auto& s : c.solutions) CHECK(s.T[0].norm() <= 1e-6);

  const auto r = compositional_synthesize(net, tmpl);
  REQUIRE(r.correct());
  csynth::runtime::VerifyOptions vo;
  vo.samples = 500;
  for (const auto* res : {&c, &r}) {
    const auto rep = csynth::runtime::verify_invariance(net, res->solutions, vo);
    CHECK(rep.passed());
    CHECK(rep.steps == 4);
  }
}

TEST_CASE("identical config and seed give identical traces") {
  std::mt19937_64 rng(5);
  const Network net = testnet::random_small(rng, 2, 0.3);
  const auto tmpl = default_template(net);
  DescentConfig cfg;
  cfg.random_start = true;
  cfg.seed = 42;
  cfg.max_iters = 30;
  const auto a = compositional_synthesize(net, tmpl, cfg);
  const auto b = compositional_synthesize(net, tmpl, cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    CHECK(a.trace[k].value == b.trace[k].value);
    CHECK(a.trace[k].step == b.trace[k].step);
  }
  CHECK(a.params.alpha == b.params.alpha);
  cfg.seed = 43;
  const auto c = compositional_synthesize(net, tmpl, cfg);
  CHECK(c.trace.front().value != a.trace.front().value);
}

TEST_CASE("centralized feasibility implies compositional convergence") {
  std::mt19937_64 rng(17);
  int feasible = 0;
  for (int rep = 0; rep < 4; ++rep) {
    const Network net = testnet::random_small(rng, 2, 0.5);
    const auto tmpl = default_template(net);
    CentralizedConfig cc;
    cc.reduction_order = 1;
    const auto c = centralized_synthesize(net, tmpl, cc);
    if (!c.correct()) continue;
    ++feasible;
    DescentConfig cfg;
    cfg.k = c.k;
    const auto r = compositional_synthesize(net, tmpl, cfg);
    CHECK(r.correct());
    CHECK(r.potential <= 1e-5);
  }
  CHECK(feasible > 0);
}

TEST_CASE("dense centralized baseline") {
  std::mt19937_64 rng(2);
  const Network net = testnet::random_small(rng, 2, 0.5);
  const auto d = centralized_dense(net);
  CHECK(d.feasible);
  CHECK(d.k >= 4);
  CHECK(d.solver_seconds >= 0.0);
  csynth::lp::SolverOptions tight;
  tight.time_limit_seconds = 1e-6;
  const Network big = csynth::sysmodel::random_network(10, 0.1, 1);
  const auto t = centralized_dense(big, 0, tight);
  CHECK_FALSE(t.feasible);
  CHECK(t.time_limit_reached);
  CHECK_THROWS_AS(centralized_dense(testnet::as_finite(net, 2)), std::invalid_argument);
}

TEST_CASE("result directory round trip") {
  const Network net = two_scalars(0.2);
  const auto tmpl = default_template(net);
  const auto r = compositional_synthesize(net, tmpl);
  REQUIRE(r.correct());
  const auto dir = std::filesystem::temp_directory_path() / "csynth_result_test";
  std::filesystem::remove_all(dir);
  write_result(r, net, dir);
  for (const char* f : {"params.json", "solution_0.json", "solution_1.json", "trace.csv", "report.json"})
    CHECK(std::filesystem::exists(dir / f));
  const auto back = read_result(dir, net, tmpl);
  CHECK(back.correct());
  CHECK(back.params.alpha.isApprox(r.params.alpha));
  REQUIRE(back.solutions.size() == 2);
  CHECK(back.solutions[1].T[0].isApprox(r.solutions[1].T[0]));
  CHECK(back.iterations == r.iterations);
  std::filesystem::remove_all(dir);
}

TEST_CASE("invariant synthesis with beta") {
  Network net;
  for (int i = 0; i < 2; ++i)
    net.subsystems.push_back(testnet::subsystem(i, scalar(0.5), Eigen::MatrixXd(1, 0), testnet::box(vec({1.0})),
                                                csynth::geom::Zonotope(VectorXd(0)), testnet::box(vec({0.25}))));
  testnet::couple(net, 0, 1, scalar(0.1), Eigen::MatrixXd(1, 0));
  testnet::couple(net, 1, 0, scalar(0.1), Eigen::MatrixXd(1, 0));
  const auto tmpl = default_template(net);
  DescentConfig cfg;
  cfg.k = {1};
  CHECK_FALSE(compositional_synthesize(net, tmpl, cfg).correct());
  cfg.beta = 0.5;
  const auto r = compositional_synthesize(net, tmpl, cfg);
  REQUIRE(r.correct());
  CHECK(r.solutions[0].beta == 0.5);
  csynth::runtime::VerifyOptions vo;
  vo.samples = 1000;
  vo.steps = 200;
  CHECK(csynth::runtime::verify_invariance(net, r.solutions, vo).passed());

  CentralizedConfig cc;
  cc.k = {1};
  cc.beta = 0.5;
  cc.reduction_order = 1;  // one disturbance column, so k = 1 suffices
  const auto c = centralized_synthesize(net, tmpl, cc);
  REQUIRE(c.correct());
  // smallest guarantees: alpha = 2 (0.1 alpha + 0.25), i.e. 0.625
  CHECK(c.params.alpha(0) == doctest::Approx(0.625).epsilon(1e-6));
  CHECK(csynth::runtime::verify_invariance(net, c.solutions, vo).passed());
}
