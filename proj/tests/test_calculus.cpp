#include <cmath>

#include "doctest.h"
#include "tdiff/calculus.hpp"
#include "tdiff/certify.hpp"

using namespace tdiff;

namespace {

Polyhedron ray_cone(std::vector<Vec> rays) { return Polyhedron::from_v(2, {{0, 0}}, std::move(rays)); }

SVMap line_map(double a) { return SVMap::poly_graph(1, 1, Region::of(ray_cone({{1, a}, {-1, -a}}))); }

// S(x) = [a x + lo, a x + hi]
SVMap band(double a, double lo, double hi) {
  return SVMap::poly_graph(1, 1, Region::of(Polyhedron::from_h(2, {{{a, -1}, -lo}, {{-a, 1}, hi}})));
}

SVMap abs_map() {
  Region g(2);
  g.add(ray_cone({{1, 1}}));
  g.add(ray_cone({{-1, 1}}));
  return SVMap::poly_graph(1, 1, g);
}

// S(x) = [-|x|, |x|]
SVMap double_cone() {
  Region g(2);
  g.add(ray_cone({{1, 1}, {1, -1}}));
  g.add(ray_cone({{-1, 1}, {-1, -1}}));
  return SVMap::poly_graph(1, 1, g);
}

HomogMap lin(double a) {
  Matrix A(1, 1);
  A(0, 0) = a;
  return HomogMap::linear(A);
}

// T(w) = (-inf, w]: T(0) != {0}
HomogMap below_identity() { return HomogMap::cone(1, 1, Region::of(Polyhedron::from_h(2, {{{-1, 1}, 0}}))); }

double lo(const Region& r) { return -support(r, {-1.0}); }
double hi(const Region& r) { return support(r, {1.0}); }

struct ChainCase {
  std::string name;
  ChainInstance inst;
};

std::vector<ChainCase> chain_corpus() {
  return {
      {"linear", {line_map(2.0), line_map(3.0), {0.0}, {0.0}, {{{0.0}, lin(2.0), lin(3.0)}}}},
      {"band_then_abs",
       {band(1.0, -1.0, 1.0), abs_map(), {0.0}, {0.5},
        {{{-0.5}, HomogMap::zero(1, 1), lin(-1.0)}, {{0.5}, HomogMap::zero(1, 1), lin(1.0)}}}},
      {"balls",
       {double_cone(), double_cone(), {0.0}, {0.0}, {{{0.0}, HomogMap::ball(1, 1, 1.0), HomogMap::ball(1, 1, 1.0)}}}},
  };
}

}  // namespace

TEST_CASE("chain rule constructions") {
  const auto corpus = chain_corpus();
  HomogMap L = chain_T(corpus[0].inst);
  REQUIRE(L.kind == HomogMap::Kind::MatrixBundle);
  REQUIRE(L.mats.size() == 1);
  CHECK(L.mats[0](0, 0) == doctest::Approx(6.0));

  ChainInstance b = corpus[2].inst;
  b.net[0].TF = HomogMap::ball(1, 1, 2.0);
  b.net[0].TG = HomogMap::ball(1, 1, 3.0);
  HomogMap B = chain_T(b);
  CHECK(B.kind == HomogMap::Kind::BallMap);
  CHECK(B.kappa == doctest::Approx(6.0));

  HypothesisReport rep;
  HomogMap U = chain_T(corpus[1].inst, &rep);
  CHECK(rep.alpha == doctest::Approx(0.0));
  CHECK(rep.beta == doctest::Approx(1.0));
  CHECK(rep.osc_holds);
  CHECK(hi(eval(U, {1.0})) == doctest::Approx(0.0));
}

TEST_CASE("chain rule hypothesis failures") {
  ChainInstance bad = chain_corpus()[0].inst;
  bad.net[0].TG = below_identity();
  try {
    chain_T(bad);
    FAIL("expected a hypothesis failure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::HypothesisFailure);
    CHECK(std::string(e.what()).find("condition 6") != std::string::npos);
  }

  ChainInstance bad5 = chain_corpus()[0].inst;
  bad5.net[0].TF = below_identity();
  try {
    chain_T(bad5);
    FAIL("expected a hypothesis failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("condition 5") != std::string::npos);
  }

  ChainInstance gap = chain_corpus()[1].inst;
  gap.net.pop_back();
  try {
    chain_T(gap);
    FAIL("expected a coverage gap");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CoverageGap);
  }

  ChainInstance off = chain_corpus()[0].inst;
  off.net[0].y = {0.3};
  CHECK_THROWS_AS(chain_T(off), Error);
}

TEST_CASE("lip at zero") {
  CHECK(lip_at_zero(lin(-2.5)) == doctest::Approx(2.5));
  CHECK(lip_at_zero(HomogMap::ball(1, 1, 0.7)) == doctest::Approx(0.7));
  CHECK(std::isinf(lip_at_zero(below_identity())));
  // T(w) = {0} on w >= 0 and empty elsewhere: the domain gap breaks Lipschitz continuity
  HomogMap half = HomogMap::cone(1, 1, Region::of(ray_cone({{1, 0}})));
  CHECK(std::isinf(lip_at_zero(half)));
  // T(w) = [-|w|, |w|] as a cone graph
  CHECK(lip_at_zero(to_cone(HomogMap::ball(1, 1, 1.0))) == doctest::Approx(1.0));
}

TEST_CASE("single-valued inner map") {
  Fn f = [](const Vec& x) { return Vec{2 * x[0]}; };
  HomogMap L = chain_single(f, {0.0}, lin(2.0), line_map(3.0), lin(3.0), {0.0});
  CHECK(L.mats[0](0, 0) == doctest::Approx(6.0));
  HomogMap B = chain_single(f, {0.0}, HomogMap::ball(1, 1, 2.0), double_cone(), HomogMap::ball(1, 1, 1.5), {0.0});
  CHECK(B.kappa == doctest::Approx(3.0));
  CHECK_THROWS_AS(chain_single(f, {0.0}, lin(2.0), line_map(3.0), below_identity(), {0.0}), Error);
  CHECK_THROWS_AS(chain_single(f, {0.0}, lin(2.0), line_map(3.0), lin(3.0), {1.0}), Error);
}

TEST_CASE("chain rule soundness against the certifier") {
  CertConfig cfg;
  const double d = cfg.delta_ladder.back();
  for (const auto& c : chain_corpus()) {
    CAPTURE(c.name);
    const ChainInstance& I = c.inst;
    const SVMap GF = compose_graphs(I.G, I.F);
    const HomogMap T = chain_T(I);
    Certificate outer = certify_pseudo(GF, target(inflate(T, d)), I.xbar, I.zbar, Notion::pseudoOuterT, cfg);
    CHECK(outer.verdict == Verdict::verified_at_scale);
    // every corpus inner map is also pseudo strictly differentiable with its attachment
    for (const auto& p : I.net) {
      Certificate fs = certify_pseudo(I.F, target(p.TF), I.xbar, p.y, Notion::pseudoStrictT, cfg);
      REQUIRE(fs.verdict == Verdict::verified_at_scale);
    }
    Certificate strict = certify_pseudo(GF, target(inflate(T, d)), I.xbar, I.zbar, Notion::pseudoStrictT, cfg);
    CHECK(strict.verdict == Verdict::verified_at_scale);
  }
}

TEST_CASE("sum rule") {
  HomogMap L = sum_T({line_map(2.0), line_map(3.0)}, {0.0}, {0.0}, {{{{0.0}, {0.0}}, {lin(2.0), lin(3.0)}}});
  REQUIRE(L.kind == HomogMap::Kind::MatrixBundle);
  CHECK(L.mats[0](0, 0) == doctest::Approx(5.0));

  HomogMap B = sum_T({double_cone(), double_cone()}, {0.0}, {0.0},
                     {{{{0.0}, {0.0}}, {HomogMap::ball(1, 1, 1.0), HomogMap::ball(1, 1, 2.0)}}});
  CHECK(B.kind == HomogMap::Kind::BallMap);
  CHECK(B.kappa == doctest::Approx(3.0));

  const std::vector<SVMap> Ss{band(1.0, 0.0, 1.0), band(2.0, 0.0, 1.0)};
  std::vector<SumNetPoint> net;
  for (int k = 0; k <= 20; ++k) {
    const double t = k / 20.0;
    net.push_back({{{t}, {1.0 - t}}, {lin(1.0), lin(2.0)}});
  }
  HypothesisReport rep;
  HomogMap T = sum_T(Ss, {0.0}, {1.0}, net, 0.05, &rep);
  CHECK(rep.osc_holds);
  CHECK(lo(eval(T, {1.0})) == doctest::Approx(3.0));
  CHECK(hi(eval(T, {1.0})) == doctest::Approx(3.0));

  CertConfig cfg;
  Certificate c = certify_pseudo(sum_graphs(Ss), target(inflate(T, cfg.delta_ladder.back())), {0.0}, {1.0},
                                 Notion::pseudoOuterT, cfg);
  CHECK(c.verdict == Verdict::verified_at_scale);

  std::vector<SumNetPoint> sparse{net.front(), net.back()};
  try {
    sum_T(Ss, {0.0}, {1.0}, sparse);
    FAIL("expected a coverage gap");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CoverageGap);
  }
  std::vector<SumNetPoint> wrong{{{{0.2}, {0.2}}, {lin(1.0), lin(2.0)}}};
  CHECK_THROWS_AS(sum_T(Ss, {0.0}, {1.0}, wrong), Error);
  std::vector<SumNetPoint> unbounded{{{{0.5}, {0.5}}, {below_identity(), lin(2.0)}}};
  CHECK_THROWS_AS(sum_T(Ss, {0.0}, {1.0}, unbounded), Error);
}
