#include <doctest.h>

#include <random>

#include "csynth/contracts/contracts.hpp"
#include "csynth/geom/containment.hpp"
#include "oracles.hpp"
#include "test_networks.hpp"
#include "test_util.hpp"

using namespace csynth::contracts;
using csynth::sysmodel::Mode;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using testutil::mat;
using testutil::scalar;
using testutil::vec;

namespace {

PotentialOptions opts(int k = 4, int order = 1) {
  PotentialOptions o;
  o.k = {k};
  o.reduction_order = order;
  return o;
}

double value_at(const Network& net, const ContractTemplate& tmpl, ContractParams p, const VectorXd& alpha, int i,
                const PotentialOptions& o) {
  p.alpha = alpha;
  return potential_component(net, tmpl, p, i, o).value;
}

double grad_entry(const PotentialEval& ev, int k) {
  for (const auto& [idx, g] : ev.gradient)
    if (idx == k) return g;
  return 0.0;
}

// one scalar subsystem per entry of `d`, uncoupled
Network scalar_net(const std::vector<double>& d) {
  Network net;
  for (std::size_t i = 0; i < d.size(); ++i)
    net.subsystems.push_back(testnet::subsystem(static_cast<int>(i) + 1, scalar(1), scalar(1), {vec({0}), scalar(1)},
                                                {vec({0}), scalar(1)}, {vec({0}), scalar(d[i])}));
  return net;
}

}  // namespace

TEST_CASE("default template of the three-subsystem example") {
  const Network net = testnet::three_coupled();
  const ContractTemplate tmpl = default_template(net);
  const ParamLayout layout(tmpl);
  CHECK(layout.total() == 6);
  for (int i = 0; i < 3; ++i) {
    CHECK(tmpl.active(i, 0, Channel::State));
    CHECK_FALSE(tmpl.active(i, 0, Channel::Input));
    CHECK(layout.offset(i, 0, Channel::State) == 2 * i);
    CHECK(layout.offset(i, 0, Channel::Input) == -1);
    CHECK(tmpl.set(i, 0, Channel::State).generators() == MatrixXd::Identity(2, 2));
  }
  CHECK(layout.label(3, net) == "x2[t=0][1]");
  const VectorXd amax = alpha_max(tmpl, net);
  CHECK((amax - VectorXd::Ones(6)).cwiseAbs().maxCoeff() < 1e-9);
  const ContractParams p = initial_params(tmpl, net);
  CHECK((p.alpha - 0.5 * VectorXd::Ones(6)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(guarantee_set(tmpl, p.layout, p.alpha, 1, 0, Channel::State).generators()(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("single subsystem has no parameters") {
  const Network net = scalar_net({0.1});
  const ContractTemplate tmpl = default_template(net);
  CHECK(ParamLayout(tmpl).total() == 0);
  const ContractParams p = initial_params(tmpl, net);
  const PotentialValue v = potential(net, tmpl, p, opts(1));
  CHECK(v.value == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(v.gradient.size() == 0);
}

TEST_CASE("alpha max examples") {
  Network net = scalar_net({0.1, 0.1});
  net.subsystems[0] = testnet::subsystem(1, MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 0),
                                         testnet::box(vec({2, 2})), Zonotope(VectorXd(0), MatrixXd(0, 0)),
                                         testnet::box(vec({0.1, 0.1})));
  net.subsystems[1] = net.subsystems[0];
  net.subsystems[1].id = 2;
  net.subsystems[1].x_bound = {testnet::box(vec({1, 1}))};
  testnet::couple(net, 0, 1, MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 0));
  testnet::couple(net, 1, 0, MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 0));
  ContractTemplate tmpl = default_template(net);

  // template equal to the bound
  VectorXd amax = alpha_max(tmpl, net);
  CHECK((amax - VectorXd::Ones(4)).cwiseAbs().maxCoeff() < 1e-9);

  // identity inside 2 I
  tmpl.state[0][0] = {vec({0, 0}), MatrixXd::Identity(2, 2)};
  // single diagonal column inside the unit box
  tmpl.state[1][0] = {vec({0, 0}), mat({{1}, {1}})};
  amax = alpha_max(tmpl, net);
  REQUIRE(amax.size() == 3);
  CHECK(amax(0) == doctest::Approx(2.0));
  CHECK(amax(1) == doctest::Approx(2.0));
  CHECK(amax(2) == doctest::Approx(1.0));

  tmpl.state[1][0] = {vec({3, 0}), mat({{1}, {1}})};
  CHECK_THROWS_AS(alpha_max(tmpl, net), ContractError);
  tmpl.state[1][0] = {vec({0, 0}), mat({{0}, {0}})};
  CHECK_THROWS_AS(alpha_max(tmpl, net), ContractError);
}

TEST_CASE("augmented disturbance") {
  const Network lone = scalar_net({0.3});
  const ContractTemplate lt = default_template(lone);
  const ContractParams lp = initial_params(lt, lone);
  CHECK(augmented_disturbance(lone, lt, lp, 0, 0) == lone.D(0, 0));

  const Network net = testnet::three_coupled(0.05);
  const ContractTemplate tmpl = default_template(net);
  ContractParams p = initial_params(tmpl, net);
  const AugmentedColumns ac = augmented_columns(net, tmpl, p.layout, 0, 0);
  REQUIRE(ac.columns.cols() == 6);
  CHECK(ac.alpha_index == std::vector<int>{2, 3, 4, 5, -1, -1});
  CHECK(ac.columns.col(0) == vec({0.1, 0.1}));
  CHECK(ac.columns.col(1) == vec({0.01, 0.01}));
  CHECK(ac.columns.col(2) == vec({0.8, 0.8}));
  CHECK(ac.columns.col(3) == vec({0.1, 0.1}));
  CHECK(ac.columns.col(4) == vec({0.05, 0}));

  p.alpha << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
  const Zonotope w = augmented_disturbance(net, tmpl, p, 0, 0);
  CHECK(w.generators()(0, 0) == doctest::Approx(0.03));
  CHECK(w.generators()(0, 3) == doctest::Approx(0.06));
  CHECK(w.generators()(1, 5) == doctest::Approx(0.05));

  // zero scaling leaves D plus the shifted centres
  p.alpha.setZero();
  const Zonotope w0 = augmented_disturbance(net, tmpl, p, 0, 0);
  CHECK(w0.generators().leftCols(4).cwiseAbs().maxCoeff() == 0.0);
  CHECK(w0.center() == VectorXd::Zero(2));
}

TEST_CASE("correctness check margins") {
  Network net = scalar_net({0.1, 0.1});
  testnet::couple(net, 0, 1, scalar(0.1), scalar(0.1));
  testnet::couple(net, 1, 0, scalar(0.1), scalar(0.1));
  const ContractTemplate tmpl = default_template(net);
  const ContractParams p = initial_params(tmpl, net);
  std::vector<ViableSolution> sols(2);
  for (int i = 0; i < 2; ++i) {
    ViableSolution& s = sols[static_cast<std::size_t>(i)];
    s.mode = csynth::viability::TubeMode::Invariant;
    s.xbar = {vec({0})};
    s.T = {scalar(0.5)};
    s.ubar = {vec({0})};
    s.M = {scalar(0.5)};
  }
  CorrectnessReport rep = check_correctness(net, tmpl, p, sols);
  CHECK(rep.correct);
  for (const auto& m : rep.margins) CHECK(m.margin == 0.0);

  sols[1].ubar = {vec({0.5})};
  rep = check_correctness(net, tmpl, p, sols);
  CHECK_FALSE(rep.correct);
  int bad = 0;
  for (const auto& m : rep.margins) {
    if (m.certified) continue;
    ++bad;
    CHECK(m.subsystem == 1);
    CHECK(m.channel == Channel::Input);
    CHECK(m.margin == doctest::Approx(0.5).epsilon(1e-7));
  }
  CHECK(bad == 1);
}

TEST_CASE("decoupled subsystem inside its template has zero potential and gradient") {
  Network net = scalar_net({0.05, 0.05});
  testnet::couple(net, 0, 1, scalar(0.0), scalar(0.0));
  testnet::couple(net, 1, 0, scalar(0.01), scalar(0.0));
  const ContractTemplate tmpl = default_template(net);
  ContractParams p = initial_params(tmpl, net);
  for (double a : {0.2, 0.5, 0.9}) {
    p.alpha.setConstant(a);
    const PotentialValue v = potential(net, tmpl, p, opts(1));
    CHECK(v.value == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(v.gradient.cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("large neighbour assumption raises the potential") {
  const Network net = testnet::three_coupled();
  const ContractTemplate tmpl = default_template(net);
  ContractParams p = initial_params(tmpl, net);
  p.alpha << 0.3, 0.3, 0.5, 0.5, 1.0, 1.0;
  const PotentialOptions o = opts(4);
  const PotentialEval ev = potential_component(net, tmpl, p, 0, o);
  REQUIRE(ev.finite());
  CHECK(ev.value > 0.0);
  const double g = grad_entry(ev, 4);
  CHECK(g > 0.0);
  const double eps = 1e-5;
  VectorXd up = p.alpha, dn = p.alpha;
  up(4) += eps;
  dn(4) -= eps;
  const double fd = (value_at(net, tmpl, p, up, 0, o) - value_at(net, tmpl, p, dn, 0, o)) / (2 * eps);
  CHECK(std::abs(fd - g) <= 1e-3 * std::max(1.0, std::abs(g)));
  // value is the sum of slacks
  double s = 0.0;
  for (double d : ev.dx) s += d;
  for (double d : ev.du) s += d;
  CHECK(s == doctest::Approx(ev.value).epsilon(1e-9));
}

TEST_CASE("dual gradient matches central differences") {
  std::mt19937_64 rng(2024);
  int total = 0;
  int good = 0;
  for (int inst = 0; inst < 12; ++inst) {
    const bool finite = inst % 3 == 2;
    Network net = testnet::random_small(rng, 2 + inst % 2, 0.5 + 0.25 * (inst % 4));
    if (finite) net = testnet::as_finite(net, 3);
    const ContractTemplate tmpl = default_template(net);
    ContractParams p = initial_params(tmpl, net);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int k = 0; k < p.alpha.size(); ++k) p.alpha(k) = u(rng) * p.alpha_max(k);
    const PotentialOptions o = opts(finite ? 2 : 4);
    const PotentialValue v = potential(net, tmpl, p, o, 1);
    if (!v.finite()) continue;
    for (int k = 0; k < p.alpha.size(); ++k) {
      const double eps = 1e-5;
      ContractParams q = p;
      q.alpha(k) += eps;
      const double vp = potential(net, tmpl, q, o, 1).value;
      q.alpha(k) -= 2 * eps;
      const double vm = potential(net, tmpl, q, o, 1).value;
      const double fd = (vp - vm) / (2 * eps);
      ++total;
      if (std::abs(fd - v.gradient(k)) <= 1e-3 * std::max(1.0, std::abs(fd))) ++good;
    }
  }
  REQUIRE(total > 20);
  CHECK(good >= 0.95 * total);
}

TEST_CASE("potential is convex along segments") {
  std::mt19937_64 rng(77);
  for (int inst = 0; inst < 6; ++inst) {
    Network net = testnet::random_small(rng, 2, 1.0 + inst * 0.3);
    const ContractTemplate tmpl = default_template(net);
    ContractParams p = initial_params(tmpl, net);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    VectorXd a(p.alpha.size()), b(p.alpha.size());
    for (int k = 0; k < a.size(); ++k) {
      a(k) = u(rng) * p.alpha_max(k);
      b(k) = u(rng) * p.alpha_max(k);
    }
    std::vector<double> v;
    for (int s = 0; s <= 10; ++s) {
      p.alpha = a + (b - a) * (s / 10.0);
      v.push_back(potential(net, tmpl, p, opts(4), 1).value);
    }
    for (int s = 1; s < 10; ++s) CHECK(v[s] <= 0.5 * (v[s - 1] + v[s + 1]) + 1e-6);
    for (int s = 1; s < 10; ++s) CHECK(v[s] <= v[0] + (v[10] - v[0]) * (s / 10.0) + 1e-6);
  }
}

TEST_CASE("boxing never lowers the potential") {
  // compared at the same number of shift blocks: k = 3 * (disturbance columns)
  std::mt19937_64 rng(9);
  for (int inst = 0; inst < 5; ++inst) {
    const Network net = testnet::random_small(rng, 2 + inst % 2, 0.3 + 0.3 * inst);
    const ContractTemplate tmpl = default_template(net);
    ContractParams p = initial_params(tmpl, net);
    std::uniform_real_distribution<double> u(0.2, 1.0);
    for (int k = 0; k < p.alpha.size(); ++k) p.alpha(k) = u(rng) * p.alpha_max(k);
    auto with_blocks = [&](int order) {
      PotentialOptions o = opts(1, order);
      o.k.clear();
      for (int i = 0; i < net.size(); ++i) {
        const int q = static_cast<int>(augmented_columns(net, tmpl, p.layout, i, 0).columns.cols());
        const int n = net.subsystems[static_cast<std::size_t>(i)].n;
        const int cols = order == 0 ? q : order == 1 ? n : std::min(q, order * n);
        o.k.push_back(3 * cols);
      }
      return potential(net, tmpl, p, o, 1).value;
    };
    const double exact = with_blocks(0);
    CHECK(with_blocks(1) >= exact - 1e-7);
    CHECK(with_blocks(2) >= exact - 1e-7);
  }
}

TEST_CASE("potential is the ordered sum of its components and deterministic") {
  std::mt19937_64 rng(31);
  const Network net = testnet::random_small(rng, 3, 2.0);
  const ContractTemplate tmpl = default_template(net);
  const ContractParams p = initial_params(tmpl, net, 0.8);
  const PotentialValue a = potential(net, tmpl, p, opts(4), 3);
  const PotentialValue b = potential(net, tmpl, p, opts(4), 1);
  CHECK(a.value == b.value);
  CHECK(a.gradient == b.gradient);
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) sum += potential_component(net, tmpl, p, i, opts(4)).value;
  CHECK(a.value == doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("finite horizon potential and the terminal bound") {
  Network net = scalar_net({0.05, 0.05});
  testnet::couple(net, 0, 1, scalar(0.2), scalar(0.0));
  testnet::couple(net, 1, 0, scalar(0.2), scalar(0.0));
  net = testnet::as_finite(net, 3);
  const ContractTemplate tmpl = default_template(net);
  REQUIRE(ParamLayout(tmpl).total() == 6);
  ContractParams p = initial_params(tmpl, net);
  const PotentialEval ev = potential_component(net, tmpl, p, 0, opts(1));
  REQUIRE(ev.finite());
  CHECK(ev.dx.size() == 4);  // three guarantees and the terminal bound
  CHECK(ev.du.size() == 3);
  CHECK(ev.solution->T.size() == 4);

  // the disturbance alone exceeds the terminal bound
  Network wide = net;
  wide.subsystems[0].d_set = {Zonotope(vec({0}), scalar(1.5))};
  const PotentialEval over = potential_component(wide, tmpl, p, 0, opts(1));
  REQUIRE(over.finite());
  CHECK(over.dx.back() >= 0.5 - 1e-7);
  CHECK(over.value >= 0.5 - 1e-7);
  CHECK_FALSE(satisfy_component(wide, tmpl, p, 0, opts(1)).has_value());
}

TEST_CASE("zero potential yields a certified composition") {
  Network net = scalar_net({0.05, 0.05});
  testnet::couple(net, 0, 1, scalar(0.1), scalar(0.0));
  testnet::couple(net, 1, 0, scalar(0.1), scalar(0.0));
  const ContractTemplate tmpl = default_template(net);
  ContractParams p = initial_params(tmpl, net);
  p.alpha.setConstant(0.5);
  const PotentialValue v = potential(net, tmpl, p, opts(1));
  REQUIRE(v.value < 1e-9);
  std::vector<ViableSolution> sols;
  for (int i = 0; i < 2; ++i) {
    auto s = satisfy_component(net, tmpl, p, i, opts(1));
    REQUIRE(s.has_value());
    sols.push_back(*s);
  }
  CHECK(check_correctness(net, tmpl, p, sols).correct);
  // too small a guarantee for the neighbour's needs
  p.alpha.setConstant(0.01);
  CHECK(potential(net, tmpl, p, opts(1)).value > 0.0);
  CHECK_FALSE(satisfy_component(net, tmpl, p, 0, opts(1)).has_value());
}

TEST_CASE("params JSON round trip") {
  const Network net = testnet::three_coupled();
  const ContractTemplate tmpl = default_template(net);
  ContractParams p = initial_params(tmpl, net);
  p.alpha << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
  const auto j = params_to_json(p, net);
  CHECK(j["subsystems"][1]["id"] == 2);
  CHECK(j["subsystems"][1]["input"].empty());
  const ContractParams back = params_from_json(j, tmpl, net);
  CHECK(back.alpha == p.alpha);
  CHECK(back.alpha_max == p.alpha_max);
  auto broken = j;
  broken["subsystems"][0]["state"] = csynth::io::Json::array();
  CHECK_THROWS(params_from_json(broken, tmpl, net));
}

TEST_CASE("contracting scalars with beta") {
  // x_i+ = 0.5 x_i + 0.1 x_j + d, |d| <= 0.25, no inputs: the smallest
  // invariant interval has half-width 2 (0.1 alpha_j + 0.25)
  Network net;
  for (int i = 0; i < 2; ++i)
    net.subsystems.push_back(testnet::subsystem(i, scalar(0.5), MatrixXd(1, 0), {vec({0}), scalar(1)},
                                                Zonotope(VectorXd(0)), {vec({0}), scalar(0.25)}));
  testnet::couple(net, 0, 1, scalar(0.1), MatrixXd(1, 0));
  testnet::couple(net, 1, 0, scalar(0.1), MatrixXd(1, 0));
  const ContractTemplate tmpl = default_template(net);
  ContractParams p = initial_params(tmpl, net);
  REQUIRE(p.alpha.size() == 2);

  PotentialOptions o = opts(1);
  p.alpha.setConstant(0.8);
  CHECK_FALSE(potential(net, tmpl, p, o).finite());  // needs A^k W = 0
  o.beta = 0.5;
  const PotentialValue v = potential(net, tmpl, p, o);
  REQUIRE(v.finite());
  CHECK(v.value == doctest::Approx(0.0).epsilon(1e-7));
  for (const auto& c : v.components) {
    CHECK(c.solution->beta == 0.5);
    CHECK(std::abs(c.solution->omega(0).generators()(0, 0)) >= 0.66 - 1e-7);
  }

  p.alpha.setConstant(0.5);
  CHECK(potential(net, tmpl, p, o).value == doctest::Approx(0.2).epsilon(1e-7));
  o.beta = 0.4;  // below 0.5^k
  CHECK_FALSE(potential(net, tmpl, p, o).finite());
  o.k = {2};
  o.beta = 0.25;
  CHECK(potential(net, tmpl, p, o).value == doctest::Approx(0.2).epsilon(1e-7));
}
