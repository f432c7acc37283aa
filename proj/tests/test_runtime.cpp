#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "csynth/runtime/runtime.hpp"
#include "csynth/synthesis/synthesis.hpp"
#include "test_networks.hpp"
#include "test_util.hpp"

using namespace csynth::runtime;
using csynth::contracts::default_template;
using csynth::geom::Zonotope;
using csynth::sysmodel::Mode;
using Eigen::VectorXd;
using testutil::mat;
using testutil::scalar;
using testutil::vec;

namespace {

std::vector<ViableSolution> synthesize(const Network& net, int k = 8) {
  csynth::synthesis::DescentConfig cfg;
  cfg.k = {k};
  const auto r = csynth::synthesis::compositional_synthesize(net, default_template(net), cfg);
  REQUIRE(r.correct());
  return r.solutions;
}

// one double integrator per subsystem, no couplings
Network independent(int count, Mode mode, int horizon = 0) {
  Network net;
  net.mode = mode;
  net.horizon = horizon;
  for (int i = 0; i < count; ++i)
    net.subsystems.push_back(testnet::subsystem(i, mat({{1, 1}, {0, 1}}), mat({{0}, {1}}),
                                                testnet::box(vec({2, 2})), testnet::box(vec({2})),
                                                testnet::box(vec({0.1, 0.1}))));
  return net;
}

// largest residual of the recorded states against the coupled recursion
double recursion_residual(const Network& net, const Trajectory& tr) {
  double worst = 0.0;
  for (int t = 0; t < tr.steps(); ++t) {
    for (int i = 0; i < net.size(); ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const auto ut = static_cast<std::size_t>(t);
      VectorXd x = net.A(i, t) * tr.x[ui][ut] + net.B(i, t) * tr.u[ui][ut] + tr.d[ui][ut];
      const auto& cps = net.subsystems[ui].couplings;
      for (std::size_t c = 0; c < cps.size(); ++c) {
        const auto j = static_cast<std::size_t>(cps[c].source);
        x += net.coupling_A(i, c, t) * tr.x[j][ut] + net.coupling_B(i, c, t) * tr.u[j][ut];
      }
      worst = std::max(worst, (x - tr.x[ui][ut + 1]).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("sampling helpers") {
  std::mt19937_64 rng(1);
  const VectorXd v = sample_zeta(6, Sampling::Vertex, rng);
  for (int k = 0; k < 6; ++k) CHECK(std::abs(v(k)) == 1.0);
  const VectorXd u = sample_zeta(6, Sampling::Uniform, rng);
  CHECK(u.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(sample_zeta(0, Sampling::Uniform, rng).size() == 0);
  const Zonotope z(vec({1, 2}), mat({{1, 0}, {0, 2}}));
  CHECK(sample_point(z, vec({1, -1})).isApprox(vec({2, 0})));
  CHECK_THROWS_AS(sample_point(z, vec({1})), std::invalid_argument);
  CHECK(trajectory_seed(0, 0) != trajectory_seed(0, 1));
  CHECK(trajectory_seed(0, 1) != trajectory_seed(1, 1));
  CHECK(trajectory_seed(7, 3) == trajectory_seed(7, 3));
}

TEST_CASE("centres map to the next centres") {
  const Network net = independent(2, Mode::Finite, 3);
  const auto sols = synthesize(net, 2);
  DecentralizedController ctrl(net, sols);
  std::vector<VectorXd> x = {sols[0].xbar[0], sols[1].xbar[0]};
  for (int t = 0; t < 3; ++t) {
    const auto r = step(net, ctrl, x, t, {net.D(0, t).center(), net.D(1, t).center()});
    REQUIRE_FALSE(r.violation);
    for (int i = 0; i < 2; ++i) {
      CHECK(r.inputs[static_cast<std::size_t>(i)].isApprox(sols[static_cast<std::size_t>(i)].ubar[static_cast<std::size_t>(t)]));
      CHECK((r.next[static_cast<std::size_t>(i)] - sols[static_cast<std::size_t>(i)].xbar[static_cast<std::size_t>(t) + 1]).norm() <= 1e-9);
    }
    x = r.next;
  }
}

TEST_CASE("zero couplings reduce to the single-subsystem update") {
  const Network net = independent(2, Mode::Infinite);
  const auto sols = synthesize(net, 4);
  DecentralizedController ctrl(net, sols);
  const std::vector<VectorXd> x = {sols[0].omega(0).center(), vec({0.01, -0.02}) + sols[1].xbar[0]};
  const std::vector<VectorXd> d = {vec({0.1, -0.1}), vec({0.0, 0.05})};
  const auto r = step(net, ctrl, x, 0, d);
  REQUIRE_FALSE(r.violation);
  for (std::size_t i = 0; i < 2; ++i) {
    const VectorXd u = csynth::viability::extract_controller(sols[i], 0, x[i]);
    CHECK(r.inputs[i].isApprox(u));
    CHECK(r.next[i].isApprox(net.A(static_cast<int>(i), 0) * x[i] + net.B(static_cast<int>(i), 0) * u + d[i]));
  }
}

TEST_CASE("closed loop on the three coupled double integrators") {
  const Network net = testnet::three_coupled();
  // subcases re-enter the test case; synthesize once
  static const std::vector<ViableSolution> sols = synthesize(net);

  SUBCASE("inputs only depend on the local state") {
    DecentralizedController ctrl(net, sols);
    std::mt19937_64 rng(9);
    const Zonotope o0 = sols[0].omega(0);
    const VectorXd x0 = sample_point(o0, sample_zeta(o0.num_generators(), Sampling::Uniform, rng));
    std::optional<VectorXd> ref;
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<VectorXd> x = {x0};
      for (int i = 1; i < 3; ++i) {
        const Zonotope o = sols[static_cast<std::size_t>(i)].omega(0);
        x.push_back(sample_point(o, sample_zeta(o.num_generators(), Sampling::Uniform, rng)));
      }
      const auto r = step(net, ctrl, x, 0, {VectorXd::Zero(2), VectorXd::Zero(2), VectorXd::Zero(2)});
      REQUIRE_FALSE(r.violation);
      if (!ref) ref = r.inputs[0];
      CHECK(r.inputs[0] == *ref);  // bitwise
    }
  }

  SUBCASE("trajectories satisfy the recursion and stay inside") {
    DecentralizedController ctrl(net, sols);
    const Trajectory tr = simulate(net, ctrl, 200, 5, Sampling::Vertex, Sampling::Vertex);
    CHECK_FALSE(tr.violation);
    CHECK(tr.steps() == 200);
    CHECK(recursion_residual(net, tr) <= 1e-10);
    // replaying the recorded disturbances reproduces the trajectory
    std::vector<VectorXd> x0;
    for (const auto& xi : tr.x) x0.push_back(xi.front());
    const Trajectory again = simulate(net, ctrl, x0, tr.d);
    CHECK(again.x == tr.x);
  }

  SUBCASE("monte carlo verification") {
    VerifyOptions vo;
    vo.samples = 1000;
    vo.steps = 100;
    vo.seed = 3;
    const VerifyReport rep = verify_invariance(net, sols, vo);
    CHECK(rep.passed());
    CHECK(rep.violations == 0);
    CHECK(rep.vertex_checks == 200LL * 3 * 4);
    CHECK(rep.max_witness.size() == 101);
    CHECK(rep.max_witness[50] <= 1.0);
    const VerifyReport same = verify_invariance(net, sols, vo);
    CHECK(same.max_witness == rep.max_witness);
    const auto j = report_to_json(rep, net);
    CHECK(j.at("passed").get<bool>());
    CHECK(j.at("violations").get<long long>() == 0);
  }

  SUBCASE("enlarged coupling is caught") {
    Network worse = net;
    for (auto& c : worse.subsystems[0].couplings)
      for (auto& a : c.a) a *= 3.0;
    VerifyOptions vo;
    vo.samples = 200;
    vo.steps = 50;
    const VerifyReport rep = verify_invariance(worse, sols, vo);
    CHECK_FALSE(rep.passed());
    CHECK(rep.violations + rep.vertex_violations > 0);
    REQUIRE_FALSE(rep.examples.empty());
    CHECK(rep.examples.front().what == "state");
  }

  SUBCASE("no samples is a vacuous pass") {
    VerifyOptions vo;
    vo.samples = 0;
    const VerifyReport rep = verify_invariance(net, sols, vo);
    CHECK(rep.vacuous);
    CHECK(rep.passed());
    CHECK(rep.vertex_checks == 0);
  }
}

TEST_CASE("controller outside its set") {
  const Network net = independent(1, Mode::Infinite);
  const auto sols = synthesize(net, 4);
  DecentralizedController ctrl(net, sols);
  CHECK_FALSE(ctrl.input(0, 0, vec({50, 50})).has_value());
  const auto r = step(net, ctrl, {vec({50, 50})}, 0, {VectorXd::Zero(2)});
  REQUIRE(r.violation);
  CHECK(r.violation->subsystem == 0);
  CHECK(r.violation->t == 0);
  CHECK_THROWS_AS(DecentralizedController(independent(2, Mode::Infinite), sols), std::invalid_argument);
}

TEST_CASE("finite horizon limits") {
  const Network net = independent(1, Mode::Finite, 2);
  const auto sols = synthesize(net, 2);
  DecentralizedController ctrl(net, sols);
  CHECK_THROWS_AS(simulate(net, ctrl, 3, 0), std::invalid_argument);
  const Trajectory tr = simulate(net, ctrl, 0, 1);
  CHECK(tr.steps() == 2);
  CHECK_FALSE(tr.violation);
  CHECK_THROWS_AS(ctrl.input(0, 2, sols[0].xbar[2]), std::out_of_range);
  CHECK(ctrl.contains(0, 2, sols[0].xbar[2]));
}

TEST_CASE("trajectory csv") {
  const Network net = independent(2, Mode::Infinite);
  const auto sols = synthesize(net, 4);
  DecentralizedController ctrl(net, sols);
  const Trajectory tr = simulate(net, ctrl, 5, 2);
  const auto path = std::filesystem::temp_directory_path() / "csynth_traj_test.csv";
  write_trajectory_csv(tr, net, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,id,x0,x1,u0");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2 * 6);
  std::filesystem::remove(path);
}
