#include <cmath>
#include <random>

#include "doctest.h"
#include "tdiff/geom.hpp"

using namespace tdiff;

namespace {

// y >= |x|
Polyhedron vee() { return Polyhedron::from_h(2, {{{1, -1}, 0}, {{-1, -1}, 0}}); }

Polyhedron interval(double a, double b) { return Polyhedron::box({a}, {b}); }

Polyhedron random_polytope(std::mt19937_64& rng, int dim, int npts) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec> pts;
  for (int i = 0; i < npts; ++i) {
    Vec p(dim);
    for (double& x : p) x = u(rng);
    pts.push_back(p);
  }
  return Polyhedron::from_v(dim, pts);
}

}  // namespace

TEST_CASE("distance to an interval endpoint") {
  CHECK(dist_point_region({0.0}, Region::of(interval(1, 2))) == doctest::Approx(1.0));
}

TEST_CASE("distance to the vee cone") {
  Region R = Region::of(vee());
  CHECK(dist_point_region({0.0, 0.0}, R) == doctest::Approx(0.0));
  // brute-force projection onto the boundary y = |x| at resolution 1e-4
  double best = 1e9;
  for (int i = -30000; i <= 30000; ++i) {
    const double x = i * 1e-4;
    best = std::min(best, std::hypot(2.0 - x, std::abs(x)));
  }
  const double d = dist_point_region({2.0, 0.0}, R);
  CHECK(std::abs(d - best) < 1e-3);
  CHECK(d == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("empty region and dimension errors") {
  CHECK_THROWS_AS(dist_point_region({0.0}, Region(1)), Error);
  CHECK_THROWS_AS(dist_point_region({0.0, 0.0}, Region::of(interval(0, 1))), Error);
  try {
    dist_point_region({0.0}, Region(1));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyRegion);
  }
  CHECK_THROWS_AS(Polyhedron::whole(5), Error);
  try {
    Polyhedron::whole(5);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnsupportedDimension);
  }
}

TEST_CASE("hausdorff examples") {
  CHECK(hausdorff(Region::of(interval(0, 1)), Region::of(interval(0, 1)), std::nullopt) == doctest::Approx(0.0));
  CHECK(hausdorff(Region::of(Polyhedron::point({0.0})), Region::of(Polyhedron::point({3.0})), std::nullopt) ==
        doctest::Approx(3.0));
  Region a = Region::of(Polyhedron::box({0, 0}, {1, 1}));
  Region b = Region::of(Polyhedron::box({0, 0}, {2, 2}));
  // dense-grid oracle at resolution 1e-3 over the larger square
  double oracle = 0.0;
  for (int i = 0; i <= 2000; i += 1)
    for (int j = 0; j <= 2000; j += 1) {
      const double x = i * 1e-3, y = j * 1e-3;
      const double dx = std::max(0.0, x - 1.0), dy = std::max(0.0, y - 1.0);
      oracle = std::max(oracle, std::hypot(dx, dy));
    }
  const double h = hausdorff(a, b, std::nullopt);
  CHECK(std::abs(h - oracle) < 1e-3);
  CHECK(h == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("hausdorff of unbounded regions needs truncation") {
  Region v = Region::of(vee());
  CHECK_THROWS_AS(hausdorff(v, v, std::nullopt), Error);
  CHECK(hausdorff(v, v, Ball{{0, 0}, 5}) == doctest::Approx(0.0));
}

TEST_CASE("minkowski sums") {
  Region s = minkowski_sum(Region::of(interval(0, 1)), Region::of(interval(0, 2)));
  REQUIRE(s.pieces.size() == 1);
  CHECK(hausdorff(s, Region::of(interval(0, 3)), std::nullopt) == doctest::Approx(0.0));

  Region tri = Region::of(Polyhedron::from_v(2, {{0, 0}, {1, 0}, {0, 1}}));
  Region sq = Region::of(Polyhedron::box({0, 0}, {1, 1}));
  Region hex = minkowski_sum(tri, sq);
  REQUIRE(hex.pieces.size() == 1);
  // (1,0) and (0,1) lie on edges, so the sum has five extreme points
  CHECK(hex.pieces[0].vertices().size() == 5);
  for (const Vec& v : std::vector<Vec>{{0, 0}, {2, 0}, {2, 1}, {1, 2}, {0, 2}}) CHECK(hex.contains(v));
  CHECK_FALSE(hex.contains({2, 2}));
  for (int k = 0; k < 100; ++k) {
    const double a = 2 * M_PI * k / 100;
    Vec u{std::cos(a), std::sin(a)};
    CHECK(std::abs(support(hex, u) - support(tri, u) - support(sq, u)) < 1e-8);
  }
  Region zero = Region::of(Polyhedron::point({0, 0}));
  CHECK(hausdorff(minkowski_sum(zero, sq), sq, std::nullopt) == doctest::Approx(0.0));
}

TEST_CASE("support function") {
  Region sq = Region::of(Polyhedron::box({0, 0}, {1, 1}));
  CHECK(support(sq, {1, 1}) == doctest::Approx(2.0));
  CHECK(std::isinf(support(Region::of(vee()), {0, 1})));
  Region seg = Region::of(Polyhedron::from_v(2, {{-1, -1}, {1, -1}}));
  CHECK(support(seg, {0, -1}) == doctest::Approx(1.0));
}

TEST_CASE("gauge") {
  Region box = Region::of(Polyhedron::box({-1, -1}, {1, 1}));
  CHECK(gauge(box, {2, 0}) == doctest::Approx(2.0));
  CHECK(gauge(Region::of(interval(-1, 2)), {4.0}) == doctest::Approx(2.0));
  CHECK(gauge(box, {0, 0}) == 0.0);
  Region pos = Region::of(interval(1, 2));
  CHECK_THROWS_AS(gauge(pos, {-1.0}), Error);
}

TEST_CASE("lines and half-lines carry explicit rays") {
  // {x} x R at x = 0.5
  Polyhedron line = Polyhedron::from_h(2, {{{1, 0}, 0.5}, {{-1, 0}, -0.5}});
  CHECK(line.vertices().size() == 1);
  CHECK(line.vertices()[0][0] == doctest::Approx(0.5));
  CHECK(line.rays().size() == 2);
  Polyhedron half = Polyhedron::from_h(1, {{{1.0}, 3.0}});
  CHECK(half.vertices().size() == 1);
  CHECK(half.rays().size() == 1);
  CHECK(half.rays()[0][0] == -1.0);
}

TEST_CASE("circumscribed ball polytopes") {
  for (int d = 2; d <= 3; ++d) {
    const double f = ball_outer_factor(d);
    CHECK(f >= 1.0);
    CHECK(f < 1.2);
    Polyhedron b = ball_outer(Vec(d, 0.0), 2.0);
    for (const auto& v : b.vertices()) CHECK(norm(v) >= 2.0 - 1e-9);
    CHECK(b.hrep().size() == static_cast<size_t>(2 * d * kApproxLevel));
  }
}

TEST_CASE("property: H/V consistency and membership vs distance") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int it = 0; it < 40; ++it) {
    const int dim = 1 + it % 3;
    Polyhedron P = random_polytope(rng, dim, 3 + it % 5);
    for (const auto& v : P.vertices())
      for (const auto& h : P.hrep()) CHECK(dot(h.normal, v) <= h.offset + kEps);
    for (int s = 0; s < 20; ++s) {
      Vec p(dim);
      for (double& x : p) x = u(rng);
      const double d = dist_point_poly(p, P);
      CHECK((d <= kEps) == P.contains(p, kEps));
    }
  }
}

TEST_CASE("property: support additivity and hausdorff pseudometric") {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 20; ++it) {
    const int dim = 2 + it % 2;
    Polyhedron A = random_polytope(rng, dim, 5), B = random_polytope(rng, dim, 5), C = random_polytope(rng, dim, 4);
    Region ra = Region::of(A), rb = Region::of(B), rc = Region::of(C);
    Region s = minkowski_sum(ra, rb);
    std::normal_distribution<double> g;
    for (int k = 0; k < 50; ++k) {
      Vec dir(dim);
      for (double& x : dir) x = g(rng);
      dir = scale(dir, 1.0 / norm(dir));
      CHECK(std::abs(support(s, dir) - support(ra, dir) - support(rb, dir)) <= 10 * kEps);
    }
    const double ab = hausdorff(ra, rb, std::nullopt), ba = hausdorff(rb, ra, std::nullopt);
    CHECK(ab == ba);
    CHECK(ab <= hausdorff(ra, rc, std::nullopt) + hausdorff(rc, rb, std::nullopt) + 3 * kEps);
  }
}
