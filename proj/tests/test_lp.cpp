#include <doctest.h>

#include <random>

#include "csynth/lp/linear_program.hpp"
#include "oracles.hpp"

using namespace csynth::lp;

namespace {

struct RandomLp {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

// Random bounded instance: a box |x_k| <= 5 plus random cuts through a
// neighbourhood of the origin, so the origin stays feasible.
RandomLp random_lp(std::mt19937_64& rng, int n, int cuts) {
  RandomLp r;
  r.a = Eigen::MatrixXd::Zero(2 * n + cuts, n);
  r.b = Eigen::VectorXd::Zero(2 * n + cuts);
  for (int k = 0; k < n; ++k) {
    r.a(2 * k, k) = 1.0;
    r.a(2 * k + 1, k) = -1.0;
    r.b(2 * k) = r.b(2 * k + 1) = 5.0;
  }
  std::uniform_real_distribution<double> u(0.5, 3.0);
  r.a.bottomRows(cuts) = oracle::random_matrix(rng, cuts, n);
  for (int q = 0; q < cuts; ++q) r.b(2 * n + q) = u(rng);
  r.c = oracle::random_matrix(rng, n, 1).col(0);
  return r;
}

LinearProgram build(const RandomLp& r, std::vector<Constraint>* rows = nullptr) {
  LinearProgram lp;
  const int n = static_cast<int>(r.a.cols());
  const VarBlock x = lp.add_variables("x", n, 1, -kInf, kInf);
  for (int q = 0; q < r.a.rows(); ++q) {
    LinExpr e;
    for (int k = 0; k < n; ++k) e.add(x(k, 0), r.a(q, k));
    const Constraint c = lp.add_constraint("r" + std::to_string(q), e, Sense::LessEqual, r.b(q));
    if (rows) rows->push_back(c);
  }
  LinExpr obj;
  for (int k = 0; k < n; ++k) obj.add(x(k, 0), r.c(k));
  lp.minimize(obj);
  return lp;
}

}  // namespace

TEST_CASE("textbook LP: min x s.t. x >= 3") {
  LinearProgram lp;
  const Var x = lp.add_variable("x", -kInf, kInf);
  const Constraint c = lp.add_constraint("lower", LinExpr(x), Sense::GreaterEqual, 3.0);
  lp.minimize(LinExpr(x));
  const LpSolution sol = solve(lp);
  REQUIRE(sol.optimal());
  CHECK(sol.value(x) == doctest::Approx(3.0));
  CHECK(sol.objective_value == doctest::Approx(3.0));
  CHECK(sol.dual(lp, c) == doctest::Approx(1.0));
  CHECK(sol.dual(lp, "lower") == doctest::Approx(1.0));
  CHECK(sol.sensitivity(c) == doctest::Approx(1.0));
  CHECK(check_kkt(lp, sol).max() < 1e-9);
}

TEST_CASE("le rows have nonnegative duals in a minimization") {
  // min -x s.t. x <= 2
  LinearProgram lp;
  const Var x = lp.add_variable("x", -kInf, kInf);
  const Constraint c = lp.add_constraint("upper", LinExpr(x), Sense::LessEqual, 2.0);
  lp.minimize(-LinExpr(x));
  const LpSolution sol = solve(lp);
  REQUIRE(sol.optimal());
  CHECK(sol.dual(lp, c) == doctest::Approx(1.0));
  CHECK(sol.sensitivity(c) == doctest::Approx(-1.0));
}

TEST_CASE("contradictory equalities are infeasible") {
  LinearProgram lp;
  const Var x = lp.add_variable("x", -kInf, kInf);
  lp.add_constraint("a", LinExpr(x), Sense::Equal, 1.0);
  lp.add_constraint("b", LinExpr(x), Sense::Equal, 2.0);
  lp.minimize(LinExpr(0.0));
  CHECK(solve(lp).status == LpStatus::Infeasible);
}

TEST_CASE("unbounded program is reported as a status") {
  LinearProgram lp;
  const Var x = lp.add_variable("x", -kInf, kInf);
  lp.add_constraint("a", LinExpr(x), Sense::LessEqual, 1.0);
  lp.minimize(LinExpr(x));
  const LpStatus s = solve(lp).status;
  CHECK(s == LpStatus::Unbounded);
}

TEST_CASE("constants on the left move to the right-hand side") {
  LinearProgram lp;
  const Var x = lp.add_variable("x", -kInf, kInf);
  lp.add_constraint("c", LinExpr(x) + 4.0, Sense::GreaterEqual, 1.0);  // x >= -3
  lp.minimize(LinExpr(x));
  const LpSolution sol = solve(lp);
  REQUIRE(sol.optimal());
  CHECK(sol.value(x) == doctest::Approx(-3.0));
}

TEST_CASE("names are unique and resolvable") {
  LinearProgram lp;
  const VarBlock b = lp.add_variables("T", 2, 3);
  CHECK(lp.variable_name(b(1, 2)) == "T[1,2]");
  CHECK(lp.find_variable("T[0,1]").has_value());
  CHECK_THROWS(lp.add_variable("T[0,0]"));
  lp.add_constraint("row", LinExpr(b(0, 0)), Sense::LessEqual, 1.0);
  CHECK_THROWS(lp.add_constraint("row", LinExpr(b(0, 1)), Sense::LessEqual, 1.0));
  CHECK(lp.find_constraint("row").has_value());
  CHECK_FALSE(lp.find_constraint("nope").has_value());
}

TEST_CASE("LP text dump lists every named row") {
  LinearProgram lp;
  const Var x = lp.add_variable("x", 0, 4);
  const Var y = lp.add_variable("y", -kInf, kInf);
  lp.add_constraint("mix", LinExpr(x) + 2.0 * LinExpr(y), Sense::LessEqual, 3.0);
  lp.add_constraint("pin", LinExpr(y), Sense::Equal, 1.0);
  lp.minimize(LinExpr(x) - LinExpr(y));
  const std::string text = lp.to_lp_format();
  CHECK(text.find("Minimize") != std::string::npos);
  CHECK(text.find("mix:") != std::string::npos);
  CHECK(text.find("pin:") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);
}

TEST_CASE("random programs match vertex enumeration") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 4;
    const RandomLp r = random_lp(rng, n, 3 + trial % 3);
    const LinearProgram lp = build(r);
    const LpSolution sol = solve(lp);
    const auto ref = oracle::lp_vertex_enumeration(r.a, r.b, r.c);
    REQUIRE(ref.has_value());
    REQUIRE(sol.optimal());
    CHECK(sol.objective_value == doctest::Approx(*ref).epsilon(1e-9));
  }
}

TEST_CASE("strong duality and KKT on random instances") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomLp r = random_lp(rng, 2 + trial % 3, 4);
    std::vector<Constraint> rows;
    const LinearProgram lp = build(r, &rows);
    const LpSolution sol = solve(lp);
    REQUIRE(sol.optimal());
    const KktResiduals kkt = check_kkt(lp, sol);
    CHECK(kkt.duality_gap <= 1e-6);
    CHECK(kkt.max() <= 1e-6);
    // dual objective b^T y with y <= 0 multipliers on <= rows
    double dual_obj = 0.0;
    for (std::size_t q = 0; q < rows.size(); ++q) {
      const double y = sol.dual(lp, rows[q]);
      CHECK(y >= -1e-9);
      dual_obj -= y * r.b(static_cast<Eigen::Index>(q));
    }
    CHECK(dual_obj == doctest::Approx(sol.objective_value).epsilon(1e-6));
  }
}

TEST_CASE("row duals predict right-hand-side perturbations") {
  std::mt19937_64 rng(21);
  int checked = 0;
  for (int trial = 0; trial < 40 && checked < 15; ++trial) {
    RandomLp r = random_lp(rng, 3, 4);
    std::vector<Constraint> rows;
    const LpSolution base = solve(build(r, &rows));
    REQUIRE(base.optimal());
    for (std::size_t q = 0; q < rows.size(); ++q) {
      const double sens = base.sensitivity(rows[q]);
      if (std::abs(sens) < 1e-3) continue;
      const double eps = 1e-4;
      RandomLp up = r;
      up.b(static_cast<Eigen::Index>(q)) += eps;
      RandomLp dn = r;
      dn.b(static_cast<Eigen::Index>(q)) -= eps;
      const LpSolution su = solve(build(up));
      const LpSolution sd = solve(build(dn));
      // skip degenerate vertices where one-sided slopes differ
      const double fwd = (su.objective_value - base.objective_value) / eps;
      const double bwd = (base.objective_value - sd.objective_value) / eps;
      if (std::abs(fwd - bwd) > 1e-6 * (1.0 + std::abs(fwd))) continue;
      CHECK(std::abs(fwd - sens) <= 0.05 * std::abs(sens));
      ++checked;
    }
  }
  CHECK(checked >= 10);
}

TEST_CASE("equality-row sensitivities have the right sign") {
  // min x + y s.t. x + y = b, x,y >= 0: d opt / d b = 1
  LinearProgram lp;
  const Var x = lp.add_variable("x");
  const Var y = lp.add_variable("y");
  const Constraint c = lp.add_constraint("sum", LinExpr(x) + LinExpr(y), Sense::Equal, 2.0);
  lp.minimize(LinExpr(x) + LinExpr(y));
  const LpSolution sol = solve(lp);
  REQUIRE(sol.optimal());
  CHECK(sol.sensitivity(c) == doctest::Approx(1.0));
}

TEST_CASE("empty program solves trivially") {
  LinearProgram lp;
  const Var x = lp.add_variable("x", 1.0, 2.0);
  lp.minimize(LinExpr(x));
  const LpSolution sol = solve(lp);
  REQUIRE(sol.optimal());
  CHECK(sol.value(x) == doctest::Approx(1.0));
}

TEST_CASE("time limit") {
  LinearProgram lp;
  const Var x = lp.add_variable("x", -kInf, kInf);
  lp.add_constraint("a", LinExpr(x), Sense::GreaterEqual, 1.0);
  lp.minimize(LinExpr(x));
  SolverOptions opts;
  opts.time_limit_seconds = 10.0;
  CHECK(solve(lp, opts).optimal());
}

TEST_CASE("time limit reached on a larger program") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LinearProgram lp;
  const int n = 400;
  std::vector<Var> x;
  for (int j = 0; j < n; ++j) x.push_back(lp.add_variable("x" + std::to_string(j)));
  for (int i = 0; i < n; ++i) {
    LinExpr row;
    for (int j = 0; j < n; ++j) row.add(x[static_cast<std::size_t>(j)], u(rng));
    lp.add_constraint("r" + std::to_string(i), row, Sense::GreaterEqual, 1.0 + u(rng));
  }
  LinExpr obj;
  for (const Var& v : x) obj.add(v, 1.0 + u(rng));
  lp.minimize(obj);
  SolverOptions opts;
  opts.time_limit_seconds = 1e-4;
  const LpSolution sol = solve(lp, opts);
  CHECK(sol.status == LpStatus::TimeLimit);
  CHECK(sol.time_limit_reached);
}
