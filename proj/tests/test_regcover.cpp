#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "tdiff/gallery.hpp"
#include "tdiff/regcover.hpp"

using namespace tdiff;

namespace {

Polyhedron ray_cone(std::vector<Vec> rays) { return Polyhedron::from_v(2, {{0, 0}}, std::move(rays)); }

SVMap line_map(double a) { return SVMap::poly_graph(1, 1, Region::of(ray_cone({{1, a}, {-1, -a}}))); }

HomogMap lin(double a) {
  Matrix A(1, 1);
  A(0, 0) = a;
  return HomogMap::linear(A);
}

HomogMap bundle1(const std::vector<double>& as) {
  std::vector<Matrix> ms;
  for (double a : as) ms.push_back(lin(a).mats[0]);
  return HomogMap::bundle(ms);
}

// S(x) = [-x, x] for x >= 0; its inverse has graph {x >= |y|}, Lipschitz with constant 1.
SVMap fan() { return SVMap::poly_graph(1, 1, Region::of(ray_cone({{1, 1}, {1, -1}}))); }

// S(x) = [|x|, inf)
SVMap epi_abs() {
  Region g(2);
  g.add(ray_cone({{1, 1}, {0, 1}}));
  g.add(ray_cone({{-1, 1}, {0, 1}}));
  return SVMap::poly_graph(1, 1, g);
}

// Continuous increasing piecewise linear f with f(0) = 0.
struct PwlCase {
  std::vector<double> breaks;  // sorted
  std::vector<double> slopes;  // one more than breaks
  bool epigraph = false;       // graph {y >= f(x)} instead of {y = f(x)}
};

double eval_pwl(const PwlCase& c, double x) {
  // integrate the slope from 0 to x
  double v = 0.0;
  auto slope_at = [&](double t) {
    std::size_t i = 0;
    while (i < c.breaks.size() && t > c.breaks[i]) ++i;
    return c.slopes[i];
  };
  std::vector<double> marks{0.0, x};
  for (double b : c.breaks)
    if ((b > std::min(0.0, x)) && (b < std::max(0.0, x))) marks.push_back(b);
  std::sort(marks.begin(), marks.end());
  for (std::size_t i = 0; i + 1 < marks.size(); ++i) v += slope_at(0.5 * (marks[i] + marks[i + 1])) * (marks[i + 1] - marks[i]);
  return x >= 0 ? v : -v;
}

SVMap pwl_map(const PwlCase& c) {
  Region g(2);
  std::vector<Vec> pts;
  for (double b : c.breaks) pts.push_back({b, eval_pwl(c, b)});
  const double s0 = c.slopes.front(), s1 = c.slopes.back();
  const Vec up{0, 1};
  auto piece = [&](Vec v, std::vector<Vec> rays, std::vector<Vec> more = {}) {
    std::vector<Vec> vs{v};
    vs.insert(vs.end(), more.begin(), more.end());
    if (c.epigraph) rays.push_back(up);
    g.add(Polyhedron::from_v(2, vs, rays));
  };
  if (pts.empty()) {
    piece({0, 0}, {{1, s0}, {-1, -s0}});
  } else {
    piece(pts.front(), {{-1, -s0}});
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) piece(pts[i], {}, {pts[i + 1]});
    piece(pts.back(), {{1, s1}});
  }
  return SVMap::poly_graph(1, 1, g);
}

PwlCase random_case(unsigned seed, bool epigraph) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> slope(std::log(1.0 / 3.0), std::log(3.0)), where(-0.2, 0.2);
  std::uniform_int_distribution<int> pieces(1, 3);
  PwlCase c;
  c.epigraph = epigraph;
  const int p = pieces(rng);
  for (int i = 0; i < p; ++i) c.slopes.push_back(std::exp(slope(rng)));
  for (int i = 0; i + 1 < p; ++i) c.breaks.push_back(i == 0 && rng() % 2 ? 0.0 : where(rng));
  std::sort(c.breaks.begin(), c.breaks.end());
  return c;
}

std::vector<double> inverse_slopes(const PwlCase& c) {
  std::vector<double> out;
  for (double s : c.slopes) out.push_back(1.0 / s);
  return out;
}

const GraphPoint origin{{0.0}, {0.0}};

}  // namespace

TEST_CASE("metric regularity on basic maps") {
  CertConfig cfg;
  // literal form: x ∈ S⁻¹(y) + T(a) with a = y - y', so the inverse slope enters with a minus sign
  CHECK(certify_mr({line_map(1.0), origin, lin(-1.0), cfg}).verdict == Verdict::verified_at_scale);
  CHECK(certify_mr({line_map(1.0), origin, lin(1.0), cfg}).verdict == Verdict::refuted);
  CHECK(certify_mr({line_map(2.0), origin, lin(-0.5), cfg}).verdict == Verdict::verified_at_scale);
  Certificate small = certify_mr({line_map(2.0), origin, lin(-0.25), cfg});
  CHECK(small.verdict == Verdict::refuted);
  REQUIRE(small.witness);
  CHECK(small.witness->dist > 4.0 * small.witness->slack);
  CHECK(small.notion == Notion::metricRegular);
  CHECK(certify_mr({fan(), origin, HomogMap::ball(1, 1, 1.0), cfg}).verdict == Verdict::verified_at_scale);
  CHECK(certify_mr({fan(), origin, HomogMap::ball(1, 1, 0.5), cfg}).verdict == Verdict::refuted);
  // the range of S(x) = [|x|, inf) misses y < 0, so S⁻¹(y) is empty there
  CHECK(certify_mr({epi_abs(), origin, HomogMap::ball(1, 1, 5.0), cfg}).verdict == Verdict::refuted);
}

TEST_CASE("open covering mirrors metric regularity after reflection") {
  CertConfig cfg;
  CHECK(certify_oc({line_map(1.0), origin, lin(1.0), cfg}).verdict == Verdict::verified_at_scale);
  CHECK(certify_oc({line_map(2.0), origin, lin(0.5), cfg}).verdict == Verdict::verified_at_scale);
  CHECK(certify_oc({line_map(2.0), origin, lin(0.25), cfg}).verdict == Verdict::refuted);
  CHECK(certify_oc({fan(), origin, HomogMap::ball(1, 1, 1.0), cfg}).notion == Notion::openCovering);
  for (double t : {0.5, 0.25}) {
    const HomogMap T = lin(t);
    CHECK(certify_oc({line_map(2.0), origin, reflect(T), cfg}).verdict ==
          certify_mr({line_map(2.0), origin, scale_input(T, -1.0), cfg}).verdict);
  }
}

TEST_CASE("metric subregularity") {
  CertConfig cfg;
  CHECK(certify_msr({line_map(1.0), origin, lin(-1.0), cfg}).verdict == Verdict::verified_at_scale);
  CHECK(certify_msr({line_map(2.0), origin, HomogMap::zero(1, 1), cfg}).verdict == Verdict::refuted);
  // S(x) = (-inf, x]: S⁻¹(0) = [0, inf) and x >= y' = -a gives dist(x, [-a, inf)) = 0 for a >= 0
  const HomogMap T = HomogMap::cone(1, 1, [] {
    Region g(2);
    g.add(ray_cone({{1, 0}, {1, -1}}));
    g.add(ray_cone({{-1, 0}}));
    return g;
  }());
  CHECK(certify_msr({gallery::half_line(), origin, T, cfg}).verdict == Verdict::verified_at_scale);
  CHECK(certify_msr({gallery::half_line(), origin, HomogMap::zero(1, 1), cfg}).verdict == Verdict::refuted);
  const SubregRecord rec = subreg_harness(gallery::half_line(), origin, scale_input(T, -1.0), cfg);
  CHECK(rec.agree);
  CHECK(rec.msr.verdict == Verdict::verified_at_scale);
}

TEST_CASE("instance validation") {
  CertConfig cfg;
  CHECK_THROWS_AS(certify_mr({line_map(1.0), {{0.0}, {1.0}}, lin(1.0), cfg}), Error);
  const SVMap orc = gallery::oracle_by_name("cube_root");
  try {
    certify_mr({orc, origin, lin(1.0), cfg});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::OracleNotInvertible);
  }
}

TEST_CASE("three-way equivalence on a seeded random corpus") {
  CertConfig cfg;
  int agree = 0;
  for (unsigned s = 0; s < 20; ++s) {
    const PwlCase c = random_case(s, false);
    const auto g = inverse_slopes(c);
    const bool good = s % 2 == 0;
    const HomogMap T = good ? bundle1(g) : lin(0.5 * *std::min_element(g.begin(), g.end()));
    const EquivalenceRecord rec = equivalence_harness(pwl_map(c), origin, T, cfg);
    CAPTURE(s);
    CHECK(rec.agree);
    CHECK(rec.it.verdict == (good ? Verdict::verified_at_scale : Verdict::refuted));
    agree += rec.agree;
  }
  CHECK(agree == 20);
  const EquivalenceRecord id = equivalence_harness(line_map(1.0), origin, HomogMap::identity(1), cfg);
  CHECK(id.agree);
  CHECK(id.mr.verdict == Verdict::verified_at_scale);
}

TEST_CASE("two-way subregularity equivalence on a seeded random corpus") {
  CertConfig cfg;
  for (unsigned s = 0; s < 20; ++s) {
    const PwlCase c = random_case(100 + s, s % 4 >= 2);
    const auto g = inverse_slopes(c);
    const bool good = s % 2 == 0;
    const HomogMap T = good ? bundle1(g) : lin(0.5 * *std::min_element(g.begin(), g.end()));
    const SubregRecord rec = subreg_harness(pwl_map(c), origin, T, cfg);
    CAPTURE(s);
    CHECK(rec.agree);
    CHECK(rec.outer_it.verdict == (good ? Verdict::verified_at_scale : Verdict::refuted));
  }
}

TEST_CASE("monotonicity in T") {
  CertConfig cfg;
  const SVMap S = line_map(2.0);
  REQUIRE(certify_mr({S, origin, lin(-0.5), cfg}).verdict == Verdict::verified_at_scale);
  CHECK(certify_mr({S, origin, bundle1({-0.5, -1.0}), cfg}).verdict == Verdict::verified_at_scale);
  CHECK(certify_mr({S, origin, unite({lin(-0.5), HomogMap::ball(1, 1, 0.1)}), cfg}).verdict ==
        Verdict::verified_at_scale);
}

TEST_CASE("ball maps reduce to the classical inequality") {
  CertConfig cfg;
  PwlCase c{{0.0}, {1.0, 3.0}};
  const SVMap S = pwl_map(c);
  const SVMap Sinv = invert(S);
  for (double kappa : {0.7, 1.2}) {
    const Certificate mr = certify_mr({S, origin, HomogMap::ball(1, 1, kappa), cfg});
    // d(x, S⁻¹(y)) <= (kappa + delta) d(y, S(x)) on the finest rung
    const double delta = cfg.delta_ladder.back();
    bool holds = true;
    for (int i = -20; i <= 20; ++i)
      for (int j = -10; j <= 10; ++j) {
        const Vec x{cfg.w_ladder.back() * i / 20.0}, y{cfg.radius_ladder.back() * j / 10.0};
        const double lhs = dist_point_region(x, slice_at(Sinv.graph, y));
        const double rhs = dist_point_region(y, eval(S, x));
        if (lhs > (kappa + delta) * rhs + 1e-9) holds = false;
      }
    CAPTURE(kappa);
    CHECK(holds == (mr.verdict == Verdict::verified_at_scale));
  }
}

TEST_CASE("set-valued perturbations as a spot check") {
  CertConfig cfg;
  RegInstance inst{line_map(2.0), origin, lin(-0.5), cfg, 2};
  CHECK(certify_mr(inst).verdict == Verdict::verified_at_scale);
  inst.T = lin(-0.25);
  // singletons refute; companions can only help the right side
  CHECK(certify_mr(inst).verdict != Verdict::verified_at_scale);
}

TEST_CASE("gauge reduction of (C, T) maps") {
  const Region C = Region::of(Polyhedron::box({-1.0}, {2.0}));
  const HomogMap Tp = ct_reduce(C, lin(3.0));
  auto bounds = [](const Region& r) { return std::make_pair(-support(r, {-1.0}), support(r, {1.0})); };
  // gauge(C, 1) = 1/2, T(C) = [-3, 6]
  auto b = bounds(eval(Tp, {1.0}));
  CHECK(b.first == doctest::Approx(-1.5));
  CHECK(b.second == doctest::Approx(3.0));
  b = bounds(eval(Tp, {-2.0}));
  CHECK(b.first == doctest::Approx(-6.0));
  CHECK(b.second == doctest::Approx(12.0));
  b = bounds(eval(Tp, {0.0}));
  CHECK(b.first == doctest::Approx(0.0));
  CHECK(b.second == doctest::Approx(0.0));

  // unit box and a ball map: T'(w) = kappa sqrt(2) |w|_inf B
  const Region box = Region::of(Polyhedron::box({-1.0, -1.0}, {1.0, 1.0}));
  const HomogMap Tb = ct_reduce(box, HomogMap::ball(2, 1, 2.0));
  for (const Vec& w : {Vec{1.0, 0.0}, Vec{1.0, 1.0}, Vec{0.5, -0.25}}) {
    const double expect = 2.0 * std::sqrt(2.0) * std::max(std::abs(w[0]), std::abs(w[1]));
    CAPTURE(w[0]);
    CHECK(support(eval(Tb, w), {1.0}) == doctest::Approx(expect).epsilon(0.03));
  }

  try {
    ct_reduce(Region::of(Polyhedron::box({0.0}, {1.0})), lin(1.0));
    FAIL("expected GaugeUnbounded");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::GaugeUnbounded);
  }
}

TEST_CASE("unrestricted perturbations") {
  CertConfig cfg;
  try {
    alt_defs_check(line_map(2.0), origin, lin(-0.5), cfg);
    FAIL("expected a hypothesis failure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::HypothesisFailure);
  }
  const AltDefsRecord ball = alt_defs_check(line_map(2.0), origin, HomogMap::ball(1, 1, 0.75), cfg);
  CHECK(ball.agree);
  CHECK(ball.constrained.verdict == Verdict::verified_at_scale);
  const AltDefsRecord zero = alt_defs_check(line_map(2.0), origin, HomogMap::zero(1, 1), cfg);
  CHECK(zero.agree);
  CHECK(zero.constrained.verdict == Verdict::refuted);
  // 0 ∈ T(w) for every w, so the hypothesis holds for this map
  CHECK_NOTHROW(alt_defs_check(fan(), origin, gallery::half_line_T(), cfg));
}

TEST_CASE("extended base range in pseudo strict certification") {
  CertConfig cfg;
  struct Case {
    SVMap S;
    HomogMap T;
    Verdict expect;
  };
  const std::vector<Case> corpus{
      {line_map(2.0), HomogMap::ball(1, 1, 2.5), Verdict::verified_at_scale},
      {line_map(2.0), HomogMap::ball(1, 1, 1.5), Verdict::refuted},
      {line_map(2.0), sum({lin(2.0), HomogMap::ball(1, 1, 0.05)}), Verdict::verified_at_scale},
      {epi_abs(), HomogMap::ball(1, 1, 1.2), Verdict::verified_at_scale},
      {epi_abs(), HomogMap::ball(1, 1, 0.8), Verdict::refuted},
  };
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CAPTURE(i);
    const ExtendedStrictRecord rec = extended_strict_check(corpus[i].S, origin, corpus[i].T, cfg);
    CHECK(rec.agree);
    CHECK(rec.local.verdict == corpus[i].expect);
    CHECK(certify_pseudo(corpus[i].S, target(corpus[i].T), {0.0}, {0.0}, Notion::pseudoStrictT, cfg).verdict ==
          corpus[i].expect);
  }
}
