#include <doctest.h>

#include <random>
#include <sstream>

#include "csynth/geom/containment.hpp"
#include "csynth/geom/membership.hpp"
#include "csynth/geom/polygon.hpp"
#include "csynth/geom/zonotope.hpp"
#include "oracles.hpp"

using namespace csynth::geom;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<int>(rows.size());
  const auto c = static_cast<int>(rows.begin()->size());
  MatrixXd m(r, c);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

bool same(const MatrixXd& a, const MatrixXd& b, double tol = 1e-12) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || (a - b).cwiseAbs().maxCoeff() <= tol);
}

}  // namespace

TEST_CASE("zonotope construction validates shapes") {
  CHECK_THROWS_AS(Zonotope(vec({0, 0}), mat({{1, 0, 0}})), DimensionError);
  CHECK_THROWS_AS(Zonotope(vec({0, std::nan("")}), MatrixXd::Identity(2, 2)), DimensionError);
  const Zonotope point(vec({1, 2}));
  CHECK(point.num_generators() == 0);
  CHECK(point.dim() == 2);
  CHECK(Zonotope(vec({0, 0}), MatrixXd::Identity(2, 4).leftCols(4)).order() == doctest::Approx(2.0));
}

TEST_CASE("affine map") {
  const Zonotope z(vec({1, 2}), MatrixXd::Identity(2, 2));
  const Zonotope id = affine_map(MatrixXd::Identity(2, 2), VectorXd::Zero(2), z);
  CHECK(id == z);

  const Zonotope s = affine_map(mat({{2, 0}, {0, 3}}), vec({1, 0}), Zonotope(VectorXd::Zero(2), MatrixXd::Identity(2, 2)));
  CHECK(same(s.center(), vec({1, 0})));
  CHECK(same(s.generators(), mat({{2, 0}, {0, 3}})));

  const Zonotope proj = affine_map(mat({{1, 1}}), vec({0}), Zonotope(VectorXd::Zero(2), MatrixXd::Identity(2, 2)));
  CHECK(same(proj.generators(), mat({{1, 1}})));
  // hull of the four mapped corners is [-2, 2]
  double lo = 1e9, hi = -1e9;
  for (double a : {-1.0, 1.0})
    for (double b : {-1.0, 1.0}) {
      lo = std::min(lo, a + b);
      hi = std::max(hi, a + b);
    }
  CHECK(proj.generators().cwiseAbs().sum() == doctest::Approx(hi));
  CHECK(-proj.generators().cwiseAbs().sum() == doctest::Approx(lo));

  CHECK_THROWS_AS(affine_map(MatrixXd::Identity(3, 3), VectorXd::Zero(3), z), DimensionError);
  CHECK_THROWS_AS(affine_map(MatrixXd::Identity(2, 2), VectorXd::Zero(3), z), DimensionError);
}

TEST_CASE("affine map commutes with sampling") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Zonotope z = oracle::random_zonotope(rng, 3, 4);
    const MatrixXd a = oracle::random_matrix(rng, 2, 3);
    const VectorXd b = oracle::random_matrix(rng, 2, 1).col(0);
    const Zonotope m = affine_map(a, b, z);
    for (int s = 0; s < 50; ++s) {
      const VectorXd zeta = oracle::random_zeta(rng, 4);
      CHECK((m.point(zeta) - (a * z.point(zeta) + b)).norm() < 1e-12);
    }
  }
}

TEST_CASE("minkowski sum") {
  const Zonotope a(vec({0}), mat({{1}}));
  const Zonotope b(vec({0}), mat({{2}}));
  const Zonotope s = minkowski_sum(a, b);
  CHECK(same(s.generators(), mat({{1, 2}})));

  const Zonotope z(vec({1, 2}), mat({{1, 0}, {2, 1}}));
  CHECK(minkowski_sum(z, Zonotope(VectorXd::Zero(2))) == z);

  const Zonotope c = minkowski_sum(Zonotope(vec({1}), mat({{1}})), Zonotope(vec({2}), mat({{0.5}})));
  CHECK(c.center()(0) == doctest::Approx(3.0));
  // interval arithmetic: [0,2] + [1.5,2.5] = [1.5,4.5]
  const double r = c.generators().cwiseAbs().sum();
  CHECK(c.center()(0) - r == doctest::Approx(1.5));
  CHECK(c.center()(0) + r == doctest::Approx(4.5));

  CHECK_THROWS_AS(minkowski_sum(a, z), DimensionError);
}

TEST_CASE("minkowski sum contains sums of samples") {
  std::mt19937_64 rng(2);
  const Zonotope z1 = oracle::random_zonotope(rng, 3, 3);
  const Zonotope z2 = oracle::random_zonotope(rng, 3, 5);
  const Zonotope s = minkowski_sum(z1, z2);
  PointLocator loc(s);
  VectorXd w;
  int inside = 0;
  for (int k = 0; k < 1000; ++k) {
    const VectorXd x = z1.point(oracle::random_zeta(rng, 3)) + z2.point(oracle::random_zeta(rng, 5));
    inside += loc.locate(x, w) ? 1 : 0;
  }
  CHECK(inside == 1000);
}

TEST_CASE("generator scaling") {
  const Zonotope z(vec({1, -1}), mat({{1, 2}, {3, 4}}));
  CHECK(scale_generators(z, VectorXd::Ones(2)) == z);
  const Zonotope zero = scale_generators(z, VectorXd::Zero(2));
  CHECK(zero.generators().isZero());
  CHECK(same(zero.center(), z.center()));
  const Zonotope d = scale_generators(Zonotope(VectorXd::Zero(2), MatrixXd::Identity(2, 2)), vec({2, 0.5}));
  CHECK(same(d.generators(), mat({{2, 0}, {0, 0.5}})));
  CHECK_THROWS_AS(scale_generators(z, vec({1, -0.1})), std::invalid_argument);
  CHECK_THROWS_AS(scale_generators(z, vec({1})), DimensionError);
}

TEST_CASE("containment certificates") {
  const Zonotope unit(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
  const Zonotope twice(VectorXd::Zero(2), 2.0 * MatrixXd::Identity(2, 2));

  const ContainmentCertificate c1 = containment_lp(unit, twice);
  REQUIRE(c1.feasible);
  CHECK(same(c1.gamma_matrix, 0.5 * MatrixXd::Identity(2, 2), 1e-7));
  CHECK(c1.gamma_vector.norm() < 1e-7);

  CHECK_FALSE(containment_lp(twice, unit).feasible);

  const Zonotope diamond(VectorXd::Zero(2), mat({{1, 1}, {1, -1}}));
  const ContainmentCertificate c3 = containment_lp(diamond, twice);
  CHECK(c3.feasible);
  // vertex oracle: all four vertices lie in the box
  for (double a : {-1.0, 1.0})
    for (double b : {-1.0, 1.0}) CHECK(oracle::zonogon_contains(twice, diamond.point(vec({a, b}))));
  CHECK(verify_certificate(diamond, twice, c3));

  CHECK_THROWS_AS(containment_lp(unit, Zonotope(vec({0}), mat({{1}}))), DimensionError);
}

TEST_CASE("certificates are sound under sampling") {
  std::mt19937_64 rng(3);
  int certified = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 3;
    const Zonotope outer = oracle::random_zonotope(rng, n, n + 2, 1.0);
    Zonotope inner = oracle::random_zonotope(rng, n, 1 + trial % 4, 0.4);
    inner = Zonotope(outer.center() + 0.2 * (inner.center() - outer.center()), inner.generators());
    const ContainmentCertificate cert = containment_lp(inner, outer);
    if (!cert.feasible) continue;
    ++certified;
    PointLocator loc(outer, 1e-7);
    VectorXd w;
    int bad = 0;
    for (int s = 0; s < 1000; ++s)
      if (!loc.locate(inner.point(oracle::random_zeta(rng, inner.num_generators())), w)) ++bad;
    CHECK(bad == 0);
  }
  CHECK(certified >= 10);
}

TEST_CASE("weighted containment rows") {
  using namespace csynth::lp;
  auto min_alpha = [](const Zonotope& inner, const VectorXd& c2, const MatrixXd& c2g) {
    LinearProgram prog;
    const VarBlock alpha = prog.add_variables("alpha", static_cast<int>(c2g.cols()), 1);
    std::vector<LinExpr> bounds;
    LinExpr obj;
    for (int k = 0; k < c2g.cols(); ++k) {
      bounds.emplace_back(alpha(k, 0));
      obj.add(alpha(k, 0), 1.0);
    }
    weighted_containment_rows(prog, "w", inner, c2, c2g, bounds);
    prog.minimize(obj);
    const LpSolution sol = solve(prog);
    REQUIRE(sol.optimal());
    VectorXd a(c2g.cols());
    for (int k = 0; k < c2g.cols(); ++k) a(k) = sol.value(alpha(k, 0));
    return a;
  };
  const MatrixXd eye = MatrixXd::Identity(2, 2);
  CHECK(same(min_alpha(Zonotope(VectorXd::Zero(2), 0.5 * eye), VectorXd::Zero(2), eye), vec({0.5, 0.5}), 1e-8));
  CHECK(min_alpha(Zonotope(vec({1, 1})), vec({1, 1}), eye).norm() < 1e-9);
  CHECK(same(min_alpha(Zonotope(VectorXd::Zero(2), mat({{1}, {1}})), VectorXd::Zero(2), eye), vec({1, 1}), 1e-8));

  // alpha only appears on the right: the bound rows carry it with coefficient -1
  LinearProgram prog;
  const Var a0 = prog.add_variable("a0");
  const Var a1 = prog.add_variable("a1");
  const ContainmentRows rows = weighted_containment_rows(prog, "w", Zonotope(VectorXd::Zero(2), 0.5 * eye),
                                                         VectorXd::Zero(2), eye, {LinExpr(a0), LinExpr(a1)});
  REQUIRE(rows.bound_rows.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    const Row& row = prog.rows()[static_cast<std::size_t>(rows.bound_rows[k].index)];
    const int av = k == 0 ? a0.index : a1.index;
    int hits = 0;
    for (const Term& t : row.terms)
      if (t.var == av) {
        ++hits;
        CHECK(t.coef == -1.0);
      }
    CHECK(hits == 1);
  }
  for (const Row& row : prog.rows()) {
    if (row.sense != Sense::Equal) continue;
    for (const Term& t : row.terms) CHECK((t.var != a0.index && t.var != a1.index));
  }
}

TEST_CASE("directed Hausdorff distance") {
  CHECK(directed_hausdorff(Zonotope(vec({0}), mat({{2}})), Zonotope(vec({0}), mat({{1}}))) == doctest::Approx(0.0));
  CHECK(directed_hausdorff(Zonotope(vec({0}), mat({{1}})), Zonotope(vec({0}), mat({{2}}))) ==
        doctest::Approx(1.0).epsilon(1e-9));
  const Zonotope unit(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
  CHECK(directed_hausdorff(unit, Zonotope(vec({3, 0}), MatrixXd::Identity(2, 2))) == doctest::Approx(3.0).epsilon(1e-9));
  // 1-D grid oracle for the second case
  CHECK(oracle::hausdorff_grid(Zonotope(vec({0}), mat({{1}})), Zonotope(vec({0}), mat({{2}})), 401) ==
        doctest::Approx(1.0));
}

TEST_CASE("zero Hausdorff distance implies certified containment") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const Zonotope outer = oracle::random_zonotope(rng, 2, 3);
    const Zonotope inner(outer.center(), 0.3 * oracle::random_matrix(rng, 2, 2));
    const double d = directed_hausdorff(outer, inner);
    if (d <= 1e-9) CHECK(containment_lp(inner, outer).feasible);
  }
}

TEST_CASE("Hausdorff distance matches grid oracle on 1-D and box-outer 2-D instances") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    const bool one_d = trial % 2 == 0;
    const int n = one_d ? 1 : 2;
    Zonotope outer = oracle::random_zonotope(rng, n, one_d ? 2 : 2);
    if (!one_d) {
      // parallelotope outer: two independent generators
      outer = Zonotope(outer.center(), oracle::random_matrix(rng, 2, 2) + 1.5 * MatrixXd::Identity(2, 2));
    }
    const Zonotope inner = oracle::random_zonotope(rng, n, one_d ? 3 : 2, 1.5);
    const int grid = one_d ? 201 : 11;
    const double ref = oracle::hausdorff_grid(outer, inner, grid);
    const double got = directed_hausdorff(outer, inner);
    CHECK(std::abs(got - ref) <= std::max(1e-4, 2.0 / (grid - 1)));
  }
}

TEST_CASE("box order reduction") {
  const MatrixXd eye = MatrixXd::Identity(2, 2);
  CHECK(order_reduce_box(Zonotope(VectorXd::Zero(2), eye)) == Zonotope(VectorXd::Zero(2), eye));
  const Zonotope d = order_reduce_box(Zonotope(VectorXd::Zero(2), mat({{1, 1}, {1, -1}})));
  CHECK(same(d.generators(), mat({{2, 0}, {0, 2}})));
  const Zonotope one = order_reduce_box(Zonotope(vec({5}), mat({{1, -2, 0.5}})));
  CHECK(one.center()(0) == 5.0);
  CHECK(same(one.generators(), mat({{3.5}})));

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Zonotope z = oracle::random_zonotope(rng, 3, 6);
    const Zonotope b = order_reduce_box(z);
    CHECK(b.order() == doctest::Approx(1.0));
    MatrixXd hull = MatrixXd::Zero(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 6; ++k) hull(i, i) += std::abs(z.generators()(i, k));
    CHECK(same(b.generators(), hull, 0.0));
    CHECK(same(b.center(), z.center(), 0.0));
    CHECK(containment_lp(z, b).feasible);
  }
}

TEST_CASE("higher-order boxing keeps the longest generators") {
  std::mt19937_64 rng(8);
  const Zonotope z = oracle::random_zonotope(rng, 2, 7);
  const Zonotope r2 = reduce_order_box(z, 2);
  CHECK(r2.num_generators() == 4);
  CHECK(containment_lp(z, r2).feasible);
  CHECK(reduce_order_box(z, 1) == order_reduce_box(z));
  CHECK(reduce_order_box(z, 5).num_generators() == z.num_generators());
  CHECK(boxing_kept_generators(z.generators(), 2).size() == 2);
}

TEST_CASE("point membership") {
  const Zonotope z(vec({1, 1}), mat({{1, 0, 2}, {0, 1, 1}}));
  const Membership center = contains_point(z, z.center());
  CHECK(center.inside);
  CHECK(center.witness.cwiseAbs().maxCoeff() <= 1.0);
  CHECK((z.point(center.witness) - z.center()).norm() < 1e-9);

  const Zonotope unit(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
  CHECK(contains_point(unit, VectorXd::Zero(2)).witness.norm() < 1e-12);
  CHECK_FALSE(contains_point(unit, vec({1.5, 0})).inside);

  const Membership m = contains_point(Zonotope(VectorXd::Zero(2), mat({{1, 1}, {0, 1}})), vec({2, 1}));
  CHECK(m.inside);
  CHECK(same(m.witness, vec({1, 1}), 1e-9));
  CHECK_THROWS_AS(contains_point(unit, vec({1})), DimensionError);
}

TEST_CASE("point membership agrees with the exact 2-D test") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Zonotope z = oracle::random_zonotope(rng, 2, 2 + trial % 6);
    PointLocator loc(z);
    VectorXd w;
    for (int s = 0; s < 200; ++s) {
      const Eigen::Vector2d x = z.center() + Eigen::Vector2d(u(rng), u(rng));
      // keep clear of the boundary so both tests are exact
      const bool in_tight = oracle::zonogon_contains(z, x, -1e-6);
      const bool in_loose = oracle::zonogon_contains(z, x, 1e-6);
      if (in_tight != in_loose) continue;
      const bool got = loc.locate(x, w);
      CHECK(got == in_loose);
      if (got) {
        CHECK(w.cwiseAbs().maxCoeff() <= 1.0);
        CHECK((z.point(w) - x).norm() <= 1e-8);
      }
    }
  }
}

TEST_CASE("point membership in higher dimensions with wide generator matrices") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const Zonotope z = oracle::random_zonotope(rng, 6, 40);
    PointLocator loc(z);
    VectorXd w;
    for (int s = 0; s < 100; ++s) {
      const VectorXd x = z.point(oracle::random_zeta(rng, 40));
      REQUIRE(loc.locate(x, w));
      CHECK((z.point(w) - x).cwiseAbs().maxCoeff() <= 1e-8);
    }
    // points pushed far along a direction must be outside
    const VectorXd far = z.center() + 1e3 * VectorXd::Ones(6);
    CHECK_FALSE(loc.locate(far, w));
  }
}

TEST_CASE("zonogon vertices") {
  const auto sq = polygon_vertices_2d(Zonotope(VectorXd::Zero(2), MatrixXd::Identity(2, 2)));
  REQUIRE(sq.size() == 4);
  const std::vector<Eigen::Vector2d> want = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  for (std::size_t k = 0; k < 4; ++k) CHECK((sq[k] - want[k]).norm() < 1e-12);

  const auto seg = polygon_vertices_2d(Zonotope(VectorXd::Zero(2), mat({{1}, {0}})));
  REQUIRE(seg.size() == 2);
  CHECK(std::abs(std::abs(seg[0].x()) - 1.0) < 1e-12);
  CHECK(seg[0].x() == doctest::Approx(-seg[1].x()));

  const auto dia = polygon_vertices_2d(Zonotope(VectorXd::Zero(2), mat({{1, 1}, {1, -1}})));
  REQUIRE(dia.size() == 4);
  for (const auto& v : dia) CHECK(v.cwiseAbs().sum() == doctest::Approx(2.0));

  CHECK_THROWS_AS(polygon_vertices_2d(Zonotope(VectorXd::Zero(3), MatrixXd::Identity(3, 3))), DimensionError);
}

TEST_CASE("zonogon area and orientation") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const Zonotope z = oracle::random_zonotope(rng, 2, 2 + trial % 7);
    const auto ring = polygon_vertices_2d(z);
    CHECK(ring.size() <= 2 * static_cast<std::size_t>(z.num_generators()));
    CHECK(polygon_area(ring) == doctest::Approx(oracle::zonogon_area(z.generators())).epsilon(1e-9));
    // counter-clockwise: positive signed area
    double twice = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const auto& a = ring[i];
      const auto& b = ring[(i + 1) % ring.size()];
      twice += a.x() * b.y() - a.y() * b.x();
    }
    CHECK(twice > 0.0);
    for (const auto& v : ring) CHECK(oracle::zonogon_contains(z, v, 1e-9));
  }
}

TEST_CASE("polygon CSV is a closed ring") {
  std::ostringstream os;
  write_polygon_csv(os, polygon_vertices_2d(Zonotope(VectorXd::Zero(2), MatrixXd::Identity(2, 2))));
  CHECK(os.str() == "x,y\n1,1\n-1,1\n-1,-1\n1,-1\n1,1\n");
}
