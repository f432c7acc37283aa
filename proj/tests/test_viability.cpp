#include <doctest.h>

#include <random>

#include "csynth/geom/containment.hpp"
#include "csynth/viability/viability.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace csynth::viability;
using csynth::geom::Zonotope;
using csynth::lp::LpStatus;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using testutil::mat;
using testutil::scalar;
using testutil::vec;

namespace {

Zonotope interval(double r) { return {vec({0.0}), scalar(r)}; }

FiniteProblem constant_problem(const MatrixXd& a, const MatrixXd& b, const Zonotope& w, const Zonotope& x,
                               const Zonotope& u, int h) {
  FiniteProblem p;
  p.A.assign(static_cast<std::size_t>(h), a);
  p.B.assign(static_cast<std::size_t>(h), b);
  p.W.assign(static_cast<std::size_t>(h), w);
  p.X.assign(static_cast<std::size_t>(h + 1), x);
  p.U.assign(static_cast<std::size_t>(h), u);
  return p;
}

// double integrator with a box of disturbances
InvariantProblem double_integrator() {
  InvariantProblem p;
  p.A = mat({{1, 1}, {0, 1}});
  p.B = mat({{0}, {1}});
  p.W = {vec({0, 0}), 0.1 * MatrixXd::Identity(2, 2)};
  p.X = {vec({0, 0}), 10.0 * MatrixXd::Identity(2, 2)};
  p.U = {vec({0}), scalar(2.0)};
  return p;
}

VectorXd random_vertex(std::mt19937_64& rng, int p) {
  std::bernoulli_distribution coin(0.5);
  VectorXd z(p);
  for (int k = 0; k < p; ++k) z(k) = coin(rng) ? 1.0 : -1.0;
  return z;
}

VectorXd sample_zeta(std::mt19937_64& rng, int p, int i) {
  return i % 2 == 0 ? oracle::random_zeta(rng, p) : random_vertex(rng, p);
}

}  // namespace

TEST_CASE("tube column counts") {
  CHECK(tube_columns(TubeMode::Growing, 2, {1, 3, 0}) == std::vector<int>{2, 3, 6, 6});
  CHECK(tube_columns(TubeMode::FixedK, 2, {1, 3, 0}) == std::vector<int>{2, 2, 2, 2});
}

TEST_CASE("scalar integrator without disturbance is viable") {
  const FiniteProblem p = constant_problem(scalar(1), scalar(1), Zonotope(vec({0.0})), interval(1), interval(1), 2);
  for (TubeMode mode : {TubeMode::Growing, TubeMode::FixedK}) {
    const auto out = finite_viable(p, 1, mode);
    REQUIRE(out.feasible());
    const ViableSolution& s = *out.solution;
    REQUIRE(s.T.size() == 3);
    REQUIRE(s.M.size() == 2);
    for (int t = 0; t < 2; ++t) {
      CHECK(s.T[t + 1](0, 0) == doctest::Approx(s.T[t](0, 0) + s.M[t](0, 0)).epsilon(1e-9));
      CHECK(std::abs(s.xbar[t + 1](0) - s.xbar[t](0) - s.ubar[t](0)) < 1e-9);
    }
    CHECK(tube_residual(s, p.A, p.B, p.W) <= 1e-7);
    CHECK(certify_guarantees(s, p.X, p.U));
  }
}

TEST_CASE("hand-built scalar tube with M = -T keeps the set constant") {
  ViableSolution s;
  s.mode = TubeMode::Growing;
  s.k = 1;
  for (int t = 0; t < 3; ++t) {
    s.xbar.push_back(vec({0.0}));
    s.T.push_back(scalar(0.5));
  }
  for (int t = 0; t < 2; ++t) {
    s.ubar.push_back(vec({0.0}));
    s.M.push_back(scalar(0.0));
  }
  const std::vector<MatrixXd> a(2, scalar(1)), b(2, scalar(1));
  const std::vector<Zonotope> w(2, Zonotope(vec({0.0}), MatrixXd(1, 0)));
  CHECK(tube_residual(s, a, b, w) == 0.0);
  s.M[0] = scalar(-0.5);
  CHECK(tube_residual(s, a, b, w) == doctest::Approx(0.5));
}

TEST_CASE("disturbance larger than the state bound is unsatisfiable") {
  const FiniteProblem p = constant_problem(scalar(1), scalar(1), interval(5), interval(1), interval(0.1), 2);
  for (TubeMode mode : {TubeMode::Growing, TubeMode::FixedK})
    for (int k : {1, 2, 4}) CHECK_FALSE(finite_viable(p, k, mode).feasible());
  const auto out = finite_viable(p, 1, TubeMode::Growing);
  CHECK(out.status == LpStatus::Infeasible);
}

TEST_CASE("invariant set of x+ = x + u + d") {
  InvariantProblem p{scalar(1), scalar(1), interval(0.1), interval(1), interval(1)};
  const auto out = rci(p, 1, 0.0, true);
  REQUIRE(out.feasible());
  CHECK(std::abs(out.solution->T(0, 0)) == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(out.solution->M(0, 0) == doctest::Approx(-out.solution->T(0, 0)).epsilon(1e-9));
  CHECK(out.solution->E.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("contraction x+ = 0.5 x + d") {
  InvariantProblem p{scalar(0.5), MatrixXd(1, 0), interval(0.5), interval(1), Zonotope(VectorXd(0), MatrixXd(0, 0))};
  // the shift-register form needs A^k G^d = 0, which never happens here
  for (int k = 1; k <= 6; ++k) CHECK_FALSE(rci(p, k, 0.0, true).feasible());
  // general form: beta >= 0.5^k and the scaled set is exactly [-1, 1]
  CHECK_FALSE(rci(p, 1, 0.4, false).feasible());
  const auto one = rci(p, 1, 0.5, false);
  REQUIRE(one.feasible());
  CHECK(one.solution->omega().generators().cwiseAbs().sum() == doctest::Approx(1.0).epsilon(1e-7));
  const auto two = rci(p, 2, 0.25, false);
  REQUIRE(two.feasible());
  CHECK(two.solution->omega().generators().cwiseAbs().sum() == doctest::Approx(1.0).epsilon(1e-7));
  CHECK_FALSE(rci(p, 2, 0.2, false).feasible());

  const auto searched = rci_beta_search(p, 1);
  REQUIRE(searched.feasible());
  CHECK(searched.solution->beta == doctest::Approx(0.5));
  const auto auto_k = rci_auto_k(p, false);
  REQUIRE(auto_k.feasible());
  CHECK(auto_k.k == 1);
}

TEST_CASE("beta scales the invariant set by 1/(1-beta)") {
  RciSolution r;
  r.xbar = vec({0.3});
  r.T = scalar(0.2);
  r.ubar = vec({0.0});
  r.M = scalar(-0.2);
  r.beta = 0.0;
  const MatrixXd g0 = r.omega().generators();
  r.beta = 0.5;
  CHECK(r.omega().generators()(0, 0) == doctest::Approx(2 * g0(0, 0)));
  CHECK(r.omega().center()(0) == doctest::Approx(0.3));
  CHECK(r.theta().generators()(0, 0) == doctest::Approx(-0.4));
  const ViableSolution v = r.as_viable();
  CHECK(v.invariant());
  CHECK(v.omega(7).generators()(0, 0) == doctest::Approx(0.4));
}

TEST_CASE("rci rejects invalid arguments") {
  InvariantProblem p{scalar(1), scalar(1), interval(0.1), interval(1), interval(1)};
  CHECK_THROWS_AS(rci(p, 1, 1.0, false), std::invalid_argument);
  CHECK_THROWS_AS(rci(p, 1, -0.1, false), std::invalid_argument);
  CHECK_THROWS_AS(rci(p, 1, 0.5, true), std::invalid_argument);
  CHECK_THROWS_AS(rci(p, 0, 0.0, true), std::invalid_argument);
}

TEST_CASE("controller examples") {
  ViableSolution s;
  s.mode = TubeMode::Invariant;
  s.k = 1;
  s.xbar = {vec({0.0})};
  s.T = {scalar(1)};
  s.ubar = {vec({0.0})};
  s.M = {scalar(-1)};
  CHECK(extract_controller(s, 0, vec({0.7}))(0) == doctest::Approx(-0.7));
  CHECK(extract_controller(s, 0, vec({0.0}))(0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(extract_controller(s, 0, vec({1.5})), OutOfSetError);

  Controller c(s);
  VectorXd u = vec({42.0});
  CHECK_FALSE(c.control(3, vec({-1.2}), u));
  CHECK(u(0) == 42.0);
  REQUIRE(c.control(3, vec({-0.25}), u));
  CHECK(u(0) == doctest::Approx(0.25));

  s.ubar = {vec({0.3})};
  s.xbar = {vec({2.0})};
  CHECK(extract_controller(s, 0, vec({2.0}))(0) == doctest::Approx(0.3));
}

TEST_CASE("finite tube is one-step invariant under sampled states and disturbances") {
  const MatrixXd a = mat({{1, 1}, {0, 1}});
  const MatrixXd b = mat({{0}, {1}});
  const Zonotope w{vec({0.05, 0}), mat({{0.1, 0}, {0.05, 0.1}})};
  const Zonotope x{vec({0, 0}), mat({{5, 1}, {0, 4}})};
  const Zonotope u{vec({0}), scalar(2)};
  const int h = 5;
  FiniteProblem p = constant_problem(a, b, w, x, u, h);
  for (TubeMode mode : {TubeMode::Growing, TubeMode::FixedK}) {
    const auto out = finite_viable(p, 4, mode);
    REQUIRE(out.feasible());
    const ViableSolution& s = *out.solution;
    CHECK(tube_residual(s, p.A, p.B, p.W) <= 1e-7);
    CHECK(certify_guarantees(s, p.X, p.U));
    if (mode == TubeMode::Growing) CHECK(s.T[h].cols() == 4 + 2 * h);
    else CHECK(s.T[h].cols() == 4);

    Controller ctl(s);
    std::mt19937_64 rng(11);
    int violations = 0;
    int input_violations = 0;
    for (int i = 0; i < 10000; ++i) {
      const int t = i % h;
      const Zonotope om = s.omega(t);
      const VectorXd xs = om.point(sample_zeta(rng, om.num_generators(), i));
      const VectorXd d = w.point(sample_zeta(rng, w.num_generators(), i / 2));
      VectorXd us;
      REQUIRE(ctl.control(t, xs, us));
      if (std::abs(us(0)) > 2.0 + 1e-7) ++input_violations;
      const VectorXd next = a * xs + b * us + d;
      if (!oracle::zonogon_contains(s.omega(t + 1), next, 1e-7)) ++violations;
    }
    CHECK(violations == 0);
    CHECK(input_violations == 0);
  }
}

TEST_CASE("pinned initial set") {
  const FiniteProblem base = constant_problem(scalar(1), scalar(1), interval(0.1), interval(2), interval(1), 3);
  FiniteProblem p = base;
  p.initial = Zonotope(vec({0.5}), mat({{0.3, 0.2}}));
  const auto out = finite_viable(p, 1, TubeMode::FixedK);
  REQUIRE(out.feasible());
  CHECK(out.k == 2);
  CHECK(out.solution->xbar[0](0) == doctest::Approx(0.5));
  CHECK(out.solution->T[0](0, 1) == doctest::Approx(0.2));
  p.initial = Zonotope(vec({0.0}), scalar(3.0));
  CHECK_FALSE(finite_viable(p, 1, TubeMode::Growing).feasible());
}

TEST_CASE("invariant set of the double integrator") {
  const InvariantProblem p = double_integrator();
  CHECK_FALSE(rci(p, 2, 0.0, true).feasible());
  const auto out = rci_auto_k(p, true);
  REQUIRE(out.feasible());
  CHECK(out.k == 4);
  const ViableSolution s = out.solution->as_viable();
  CHECK(certify_guarantees(s, {p.X}, {p.U}));
  CHECK(tube_residual(s, {p.A}, {p.B}, {p.W}) <= 1e-7);

  Controller ctl(s);
  const Zonotope om = s.omega(0);
  std::mt19937_64 rng(5);
  int violations = 0;
  for (int traj = 0; traj < 10000; ++traj) {
    VectorXd x = om.point(sample_zeta(rng, om.num_generators(), traj));
    for (int step = 0; step < 50; ++step) {
      VectorXd u;
      if (!ctl.control(step, x, u) || std::abs(u(0)) > 2.0 + 1e-7) {
        ++violations;
        break;
      }
      x = p.A * x + p.B * u + p.W.point(sample_zeta(rng, 2, step + traj));
    }
    if (!oracle::zonogon_contains(om, x, 1e-7)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("any witness gives an admissible input") {
  const InvariantProblem p = double_integrator();
  const auto out = rci(p, 4, 0.0, true);
  REQUIRE(out.feasible());
  const RciSolution& r = *out.solution;
  const Eigen::FullPivLU<MatrixXd> lu(r.T);
  const MatrixXd null = lu.kernel();
  REQUIRE(null.cols() == 2);
  std::mt19937_64 rng(3);
  int bad = 0;
  for (int i = 0; i < 2000; ++i) {
    const VectorXd z1 = 0.5 * oracle::random_zeta(rng, 4);
    const VectorXd dir = null * oracle::random_zeta(rng, 2);
    // largest step along dir that keeps the witness in the unit box
    double s = 1e300;
    for (int k = 0; k < 4; ++k)
      if (std::abs(dir(k)) > 1e-12) s = std::min(s, (1.0 - std::abs(z1(k))) / std::abs(dir(k)));
    const VectorXd z2 = z1 + s * dir;
    const VectorXd x = r.xbar + r.T * z1;
    CHECK((r.T * z2 + r.xbar - x).cwiseAbs().maxCoeff() < 1e-9);
    for (const VectorXd& z : {z1, z2}) {
      const VectorXd u = r.ubar + r.M * z;
      if (std::abs(u(0)) > 2.0 + 1e-9) ++bad;
      for (int v = 0; v < 4; ++v) {
        const VectorXd next = p.A * x + p.B * u + p.W.point(random_vertex(rng, 2));
        if (!oracle::zonogon_contains(r.omega(), next, 1e-7)) ++bad;
      }
    }
  }
  CHECK(bad == 0);
}

TEST_CASE("solution JSON round trip") {
  const FiniteProblem p = constant_problem(scalar(1), scalar(1), interval(0.1), interval(1), interval(1), 3);
  const auto out = finite_viable(p, 1, TubeMode::Growing);
  REQUIRE(out.feasible());
  const ViableSolution back = solution_from_json(solution_to_json(*out.solution));
  CHECK(back.mode == TubeMode::Growing);
  CHECK(back.k == 1);
  REQUIRE(back.T.size() == 4);
  REQUIRE(back.M.size() == 3);
  for (std::size_t t = 0; t < 4; ++t) CHECK(back.T[t] == out.solution->T[t]);
  CHECK(back.M[2] == out.solution->M[2]);
  CHECK_THROWS(tube_mode_from_string("spiral"));
}
