// One PASS/FAIL line per acceptance criterion; exit status 0 only when all pass.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include "corpus.hpp"
#include "tdiff/cli.hpp"
#include "tdiff/clarke.hpp"
#include "tdiff/coderiv.hpp"
#include "tdiff/regcover.hpp"
#include "tdiff/strictify.hpp"

using namespace tdiff;
using namespace tdiff::corpus;

namespace {

struct Result {
  bool pass = true;
  std::ostringstream detail;
  int failures = 0;

  // Records a failed check with its label; the first few labels go into the detail line.
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (failures++ < 4) detail << " [fail: " << what << "]";
  }
};

bool verified(const Certificate& c) { return c.verdict == Verdict::verified_at_scale; }

bool all_rungs(const Certificate& c) {
  if (c.accepted_v.size() != c.config.delta_ladder.size()) return false;
  for (const auto& v : c.accepted_v)
    if (!v) return false;
  return verified(c);
}

void gallery_fidelity(Result& r) {
  const CertConfig cfg;
  const SVMap half = gallery::half_line();
  const HomogMap T = gallery::half_line_T();
  for (double x : {-1.0, 0.0, 1.0})
    r.expect(all_rungs(certify_setvalued(half, target(T), {x}, Notion::strictT, cfg)), "half-line strict at " + std::to_string(x));
  const Certificate refl = certify_setvalued(half, target(reflect(T)), {0.0}, Notion::outerT, cfg);
  const bool strong = refl.verdict == Verdict::refuted && refl.witness && refl.witness->violation() > 3 * refl.witness->slack;
  r.expect(strong, "reflected outer refutation with violation above 3x slack");
  if (refl.witness) r.detail << " reflected violation/slack=" << refl.witness->violation() / refl.witness->slack << ";";

  const SVMap col = gallery::column_map();
  const Vec p{0.3, 0.1};
  r.expect(verified(certify_setvalued(col, target(gallery::column_T1()), p, Notion::strictT, cfg)), "column strict T1");
  r.expect(verified(certify_setvalued(col, target(gallery::column_T2()), p, Notion::strictT, cfg)), "column strict T2");
  const HomogMap both = meet(gallery::column_T1(), gallery::column_T2());
  r.expect(certify_setvalued(col, target(both), p, Notion::T, cfg).verdict == Verdict::refuted, "column meet refuted");

  const Certificate hook =
      certify_pseudo(gallery::sqrt_hook(1e-3), target(gallery::sqrt_hook_T()), {0.0}, {0.0, 0.0}, Notion::pseudoStrictT, cfg);
  r.expect(hook.verdict == Verdict::refuted, "square-root hook refuted at h = 1e-3");

  const Certificate whole = certify_pseudo(gallery::whole_line(), target(HomogMap::zero(1, 1)), {0.3}, {-2.0}, Notion::pseudoT, cfg);
  r.expect(verified(whole), "whole line pseudo zero verified");
}

struct MordCase {
  std::string name;
  SVMap S;
  Vec xbar, ybar;
  double hand;  // modulus derived by hand from the slopes
};

void mordukhovich(Result& r) {
  const CertConfig cfg;
  const std::vector<MordCase> cases{
      {"line 2", line_map(2.0), {0.5}, {1.0}, 2.0},
      {"line -1/2", line_map(-0.5), {0.0}, {0.0}, 0.5},
      {"kinked 1|2", kinked(1.0, 2.0), {0.0}, {0.0}, 2.0},
      {"kinked -1|3", kinked(-1.0, 3.0), {0.0}, {0.0}, 3.0},
      {"epigraph |x|", epi_abs(), {0.0}, {0.0}, 1.0},
      {"half line", gallery::half_line(), {0.0}, {0.0}, 1.0},
      {"hypograph -2|x|", hypo_neg_abs(2.0), {0.0}, {0.0}, 2.0},
      {"plane (1,2)", plane_map(1.0, 2.0), {0.0, 0.0}, {0.0}, std::sqrt(5.0)},
      {"plane (1/2,-1)", plane_map(0.5, -1.0), {0.2, 0.1}, {0.0}, std::sqrt(1.25)},
      {"max(x1,x2)", max_map(1.0, 1.0), {0.0, 0.0}, {0.0}, 1.0},
      {"max(x1,2x2)", max_map(1.0, 2.0), {0.0, 0.0}, {0.0}, 2.0},
      {"epigraph l1", epi_l1(), {0.0, 0.0}, {0.0}, std::sqrt(2.0)},
  };
  double worst = 0.0;
  for (const auto& c : cases) {
    const Coderivative D = coderivative(c.S, c.xbar, c.ybar);
    const double gm = graphical_modulus(D);
    if (!criterion_holds(D) || !std::isfinite(gm) || gm <= 0) {
      r.expect(false, c.name + " criterion");
      continue;
    }
    const double lip = estimate_lip(c.S, c.xbar, c.ybar, cfg).value;
    const double rel = std::abs(gm - lip) / gm;
    worst = std::max(worst, rel);
    r.expect(rel <= 0.05, c.name + " lip gap " + std::to_string(rel));
    r.expect(verified(certify_pseudo(c.S, target(mord_T(D)), c.xbar, c.ybar, Notion::pseudoStrictT, cfg)),
             c.name + " pseudo strict with the directional map");
    if (std::abs(gm - c.hand) > 1e-6 * c.hand) r.detail << " note: " << c.name << " modulus " << gm << " vs hand " << c.hand << ";";
  }
  r.detail << " 12 maps, worst relative gap " << worst << ";";
}

void equivalences(Result& r) {
  const CertConfig cfg;
  const GraphPoint origin{{0.0}, {0.0}};
  int agree3 = 0, agree2 = 0;
  for (unsigned s = 0; s < 20; ++s) {
    const PwlCase c = random_pwl(s, false);
    const auto g = inverse_slopes(c);
    const HomogMap T = s % 2 == 0 ? bundle1(g) : lin(0.5 * *std::min_element(g.begin(), g.end()));
    agree3 += equivalence_harness(pwl_map(c), origin, T, cfg).agree;
  }
  for (unsigned s = 0; s < 20; ++s) {
    const PwlCase c = random_pwl(100 + s, s % 4 >= 2);
    const auto g = inverse_slopes(c);
    const HomogMap T = s % 2 == 0 ? bundle1(g) : lin(0.5 * *std::min_element(g.begin(), g.end()));
    agree2 += subreg_harness(pwl_map(c), origin, T, cfg).agree;
  }
  r.expect(agree3 == 20, "three-way agreement");
  r.expect(agree2 == 20, "two-way agreement");
  r.detail << " three-way " << agree3 << "/20, two-way " << agree2 << "/20;";
}

void clarke(Result& r) {
  const CertConfig cfg;
  const auto corpus = gallery::clarke_corpus();
  auto named = [&](const std::string& n) {
    for (const auto& g : corpus)
      if (g.name == n) return g;
    throw std::runtime_error("missing corpus function " + n);
  };
  const auto abs_fn = named("abs");
  const JacobianEstimate Ja = clarke_jacobian({abs_fn.f, 1, 1, std::nullopt}, abs_fn.xbar);
  const double ha = hausdorff(jacobian_region(Ja), Region::of(Polyhedron::segment({-1.0}, {1.0})), std::nullopt);
  r.expect(ha <= 1e-3, "abs hull");
  const auto max_fn = named("max2");
  const JacobianEstimate Jm = clarke_jacobian({max_fn.f, 2, 1, std::nullopt}, max_fn.xbar);
  const double hm = hausdorff(jacobian_region(Jm), Region::of(Polyhedron::segment({1.0, 0.0}, {0.0, 1.0})), std::nullopt);
  r.expect(hm <= 1e-2, "max hull");
  r.detail << " hull distances abs " << ha << ", max " << hm << ";";

  for (const auto& g : corpus) {
    const SmoothSampler s{g.f, g.n, g.m, std::nullopt};
    const HomogMap T = jacobian_T(clarke_jacobian(s, g.xbar));
    r.expect(verified(certify_single(g.f, target(T), g.xbar, false, cfg)), g.name + " end to end");
  }

  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (const auto& g : corpus) {
    if (g.m != 1) continue;
    const SmoothSampler s{g.f, g.n, g.m, std::nullopt};
    for (int k = 0; k < 3; ++k) {
      Vec v(g.n);
      for (double& x : v) x = nd(rng);
      const double base = clarke_dirderiv(s, g.xbar, v).value;
      for (double t : {0.5, 2.0, 3.0}) worst = std::max(worst, std::abs(clarke_dirderiv(s, g.xbar, scale(v, t)).value - t * base));
    }
  }
  r.expect(worst <= 1e-6, "directional derivative homogeneity");
  r.detail << " homogeneity defect " << worst << ";";
}

void calculus(Result& r) {
  const CertConfig cfg;
  const double d = cfg.delta_ladder.back();
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> slope(0.4, 2.5);
  int chains = 0, sums = 0;
  for (int s = 0; s < 10; ++s) {
    const double a = slope(rng), b = slope(rng), c = slope(rng);
    ChainInstance I;
    I.xbar = {0.0};
    I.zbar = {0.0};
    switch (s % 4) {
      case 0:  // linear after linear
        I.F = line_map(a), I.G = line_map(-b);
        I.net = {{{0.0}, lin(a), lin(-b)}};
        break;
      case 1:  // linear after a kink
        I.F = kinked(a, c), I.G = line_map(b);
        I.net = {{{0.0}, bundle1({a, c}), lin(b)}};
        break;
      case 2:  // kink after linear
        I.F = line_map(-a), I.G = kinked(b, c);
        I.net = {{{0.0}, lin(-a), bundle1({b, c})}};
        break;
      default:  // Lipschitz balls through a double cone
        I.F = double_cone(), I.G = line_map(b);
        I.net = {{{0.0}, HomogMap::ball(1, 1, 1.0), lin(b)}};
        break;
    }
    HypothesisReport rep;
    const HomogMap T = chain_T(I, &rep);
    const SVMap GF = compose_graphs(I.G, I.F);
    const bool outer = verified(certify_pseudo(GF, target(inflate(T, d)), I.xbar, I.zbar, Notion::pseudoOuterT, cfg));
    const bool strict = verified(certify_pseudo(GF, target(inflate(T, d)), I.xbar, I.zbar, Notion::pseudoStrictT, cfg));
    r.expect(outer && strict, "chain instance " + std::to_string(s));
    chains += outer && strict;
  }
  for (int s = 0; s < 6; ++s) {
    const double a = slope(rng), b = slope(rng), c = slope(rng);
    std::vector<SVMap> Ss;
    std::vector<HomogMap> Ts;
    switch (s % 3) {
      case 0:
        Ss = {line_map(a), line_map(-b)}, Ts = {lin(a), lin(-b)};
        break;
      case 1:
        Ss = {kinked(a, c), line_map(b)}, Ts = {bundle1({a, c}), lin(b)};
        break;
      default:
        Ss = {double_cone(), line_map(b)}, Ts = {HomogMap::ball(1, 1, 1.0), lin(b)};
        break;
    }
    HypothesisReport rep;
    const HomogMap T = sum_T(Ss, {0.0}, {0.0}, {{{{0.0}, {0.0}}, Ts}}, 0.05, &rep);
    const SVMap S = sum_graphs(Ss);
    const bool outer = verified(certify_pseudo(S, target(inflate(T, d)), {0.0}, {0.0}, Notion::pseudoOuterT, cfg));
    const bool strict = verified(certify_pseudo(S, target(inflate(T, d)), {0.0}, {0.0}, Notion::pseudoStrictT, cfg));
    r.expect(outer && strict, "sum instance " + std::to_string(s));
    sums += outer && strict;
  }
  r.detail << " chains " << chains << "/10, sums " << sums << "/6;";
}

void strict_and_limsup(Result& r) {
  const CertConfig cfg;
  struct LipCase {
    std::string name;
    SVMap S;
    Vec xbar, ybar;
  };
  const SVMap square = gallery::oracle_by_name("square", {{"box", 2.0}});
  const std::vector<LipCase> lips{
      {"line 2", line_map(2.0), {0.0}, {0.0}},
      {"kinked 1|2", kinked(1.0, 2.0), {0.0}, {0.0}},
      {"epigraph |x|", epi_abs(), {0.0}, {0.0}},
      {"half line", gallery::half_line(), {0.0}, {0.0}},
      {"double cone", double_cone(), {0.0}, {0.0}},
      {"abs", gallery::oracle_by_name("abs"), {0.0}, {0.0}},
      {"square", square, {1.0}, {1.0}},
      {"sign", gallery::sign_map(), {0.0}, {1.0}},
  };
  int inner = 0;
  for (const auto& c : lips) {
    const LipClmRecord rec = lip_equals_limsup_clm(c.S, c.xbar, c.ybar, cfg);
    r.expect(rec.one_sided, c.name + " one-sided inequality");
    if (rec.inner_sc) {
      ++inner;
      r.expect(rec.equality, c.name + " equality");
    }
    if (c.name == "square") {
      r.expect(std::abs(rec.lip_est - 2.0) <= 0.04, "square lip 2 within 2%");
      r.detail << " square lip " << rec.lip_est << ";";
    }
  }
  r.detail << " " << lips.size() << " limsup instances, " << inner << " inner semicontinuous;";

  struct StrictCase {
    std::string name;
    SVMap S;
    HomogMap T;
    Vec xbar, ybar;
  };
  std::vector<StrictCase> stricts;
  for (double x : {-1.0, 0.0, 1.0}) stricts.push_back({"half line", gallery::half_line(), gallery::half_line_T(), {x}, {x}});
  stricts.push_back({"line 2", line_map(2.0), lin(2.0), {0.0}, {0.0}});
  stricts.push_back({"kinked", kinked(1.0, 2.0), bundle1({1.0, 2.0}), {0.0}, {0.0}});
  stricts.push_back({"abs", gallery::oracle_by_name("abs"), bundle1({-1.0, 1.0}), {0.0}, {0.0}});
  stricts.push_back({"double cone", double_cone(), HomogMap::ball(1, 1, 1.0), {0.0}, {0.0}});
  stricts.push_back({"abs with slope 1", gallery::oracle_by_name("abs"), lin(1.0), {0.0}, {0.0}});
  stricts.push_back({"sign", gallery::sign_map(), HomogMap::zero(1, 1), {0.0}, {1.0}});
  int passing = 0, contradicted = 0, refused = 0;
  for (const auto& c : stricts)
    for (ProbeMode mode : {ProbeMode::Standard, ProbeMode::ExcludeBase}) {
      try {
        const StrictFromOuter res = strict_from_outer(c.S, c.T, c.xbar, c.ybar, cfg, {}, mode);
        ++passing;
        if (res.measured == Verdict::refuted) {
          ++contradicted;
          r.expect(false, c.name + " strict refuted after passing hypotheses");
        }
      } catch (const Error& e) {
        if (e.code() != Errc::HypothesisFailure) throw;
        ++refused;
      }
    }
  r.expect(passing > 0, "some strict-from-outer instance passes its hypotheses");
  r.detail << " strict-from-outer: " << passing << " passing, " << refused << " refused, " << contradicted << " contradicted;";
}

void kernel(Result& r) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-2, 2), pos(0.05, 0.5);
  std::normal_distribution<double> nd;
  int built = 0;
  auto unit = [&](int d) {
    Vec v(d);
    for (double& x : v) x = nd(rng);
    return scale(v, 1.0 / norm(v));
  };
  auto random_map = [&](int k) {
    switch (k % 3) {
      case 0: {
        Region g(2);
        for (double s : {1.0, -1.0}) g.add(Polyhedron::from_v(2, {{0, 0}}, {{s, u(rng)}, {s, u(rng)}}));
        return HomogMap::cone(1, 1, g);
      }
      case 1: {
        std::vector<Matrix> ms;
        for (int i = 0; i < 2; ++i) ms.push_back(Matrix::NullaryExpr(1, 2, [&]() { return u(rng); }));
        return HomogMap::bundle(ms);
      }
      default:
        return HomogMap::ball(2, 2, pos(rng) * 4);
    }
  };
  // Convex values agree iff their support functions do; unions fall back to truncated Hausdorff.
  auto close = [&](const Region& a, const Region& b, int m) {
    if (a.empty() || b.empty()) return a.empty() == b.empty();
    if (a.pieces.size() > 1 || b.pieces.size() > 1) return hausdorff(a, b, Ball{Vec(m, 0.0), 20.0}) <= 1e-7;
    for (int j = 0; j < 32; ++j) {
      const Vec dir = unit(m);
      const double sa = support(a, dir), sb = support(b, dir);
      if (!(sa == sb || std::abs(sa - sb) <= 1e-7)) return false;
    }
    return true;
  };
  for (int k = 0; k < 100; ++k, ++built) {
    const HomogMap T = random_map(k);
    const Vec w = scale(unit(T.dim_in), 1 + pos(rng));
    const double t = 0.1 + 4 * pos(rng);
    Region scaled;
    scaled.dim = T.dim_out;
    for (const auto& P : eval(T, w).pieces) scaled.add(P.scaled(t));
    r.expect(close(eval(T, scale(w, t)), scaled, T.dim_out), "homogeneity " + std::to_string(k));
  }
  for (int k = 0; k < 100; ++k, ++built) {
    const HomogMap T = random_map(k);
    const double d1 = pos(rng), d2 = pos(rng);
    const Vec w = scale(unit(T.dim_in), 1 + pos(rng));
    r.expect(close(eval(inflate(inflate(T, d1), d2), w), eval(inflate(T, d1 + d2), w), T.dim_out),
             "inflation composition " + std::to_string(k));
  }
  for (int k = 0; k < 100; ++k, ++built) {
    const int dim = 1 + k % 3;
    const Region a = Region::of(random_polytope(rng, dim, 3 + k % 4)), b = Region::of(random_polytope(rng, dim, 3 + k % 3));
    const Region s = minkowski_sum(a, b);
    bool ok = true;
    for (int j = 0; j < 10; ++j) {
      const Vec dir = unit(dim);
      ok = ok && std::abs(support(s, dir) - support(a, dir) - support(b, dir)) <= 1e-8;
    }
    r.expect(ok, "support additivity " + std::to_string(k));
  }
  for (int k = 0; k < 100; ++k, ++built) {
    const int dim = 1 + k % 3;
    const Region a = Region::of(random_polytope(rng, dim, 4)), b = Region::of(random_polytope(rng, dim, 4)),
                 c = Region::of(random_polytope(rng, dim, 4));
    const double ab = hausdorff(a, b, std::nullopt), ba = hausdorff(b, a, std::nullopt);
    const double ac = hausdorff(a, c, std::nullopt), cb = hausdorff(c, b, std::nullopt);
    const bool ok = ab >= 0 && std::abs(ab - ba) <= 1e-12 && ab <= ac + cb + 1e-8 && hausdorff(a, a, std::nullopt) <= 1e-12;
    r.expect(ok, "hausdorff pseudometric " + std::to_string(k));
  }
  for (int k = 0; k < 100; ++k, ++built) {
    const int dim = 1 + k % 4;
    const Polyhedron P = random_polytope(rng, dim, dim + 1 + k % 5);
    bool ok = true;
    for (const auto& v : P.vertices())
      for (const auto& h : P.hrep()) ok = ok && dot(h.normal, v) <= h.offset + kEps;
    const Polyhedron Q = Polyhedron::from_h(dim, P.hrep());
    ok = ok && hausdorff(Region::of(P), Region::of(Q), std::nullopt) <= 1e-8;
    for (int j = 0; j < 10; ++j) {
      Vec p(dim);
      for (double& x : p) x = u(rng);
      ok = ok && (dist_point_poly(p, P) <= kEps) == P.contains(p, kEps);
    }
    r.expect(ok, "H/V consistency " + std::to_string(k));
  }
  r.detail << " " << built << " constructions, " << r.failures << " failures;";
}

void determinism(Result& r) {
  const std::string dir = TDIFF_GALLERY_DIR;
  const auto a = cli::run_gallery(dir, {});
  const auto b = cli::run_gallery(dir, {});
  const std::string ra = cli::render(a.report), rb = cli::render(b.report);
  r.expect(a.exit_code == 0, "gallery exit code " + std::to_string(a.exit_code));
  r.expect(ra == rb, "byte-identical gallery reports");
  r.detail << " " << a.report.at("gallery").size() << " instances, " << ra.size() << " bytes, hash "
           << io::content_hash(io::json(ra)) << ";";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Result&)>>> criteria{
      {"gallery fidelity", gallery_fidelity},
      {"Mordukhovich consistency", mordukhovich},
      {"regularity equivalence harnesses", equivalences},
      {"Clarke corpus", clarke},
      {"calculus soundness", calculus},
      {"strict from outer and limsup of calm moduli", strict_and_limsup},
      {"kernel properties", kernel},
      {"determinism", determinism},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(r);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all = all && r.pass;
    std::printf("criterion %zu: %s - %s (%.1fs)%s\n", i + 1, r.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), secs,
                r.detail.str().c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
