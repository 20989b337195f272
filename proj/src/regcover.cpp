#include "tdiff/regcover.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace tdiff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One inclusion to check; it passes when some option has dist <= slack(delta, |a|).
struct Check {
  std::vector<std::pair<double, double>> opts;  // (dist, |a|)
  Vec x, target, a;
};

using Builder = std::function<std::vector<Check>(double r1, double r2, std::size_t idx)>;

// Two-ladder search with the verdict logic of certify_pseudo: refuted on a strong violation
// (dist > 4 slack for every option) at the finest rung, verified when every delta has a passing rung.
class Ladder {
 public:
  Ladder(std::vector<double> l1, std::vector<double> l2, Builder b, const CertConfig& cfg, double h)
      : l1_(std::move(l1)), l2_(std::move(l2)), build_(std::move(b)), cfg_(cfg), h_(h) {}

  Certificate run(Notion notion, const Vec& xbar, const Vec& ybar) {
    Certificate c;
    c.notion = notion;
    c.config = cfg_;
    c.xbar = xbar;
    c.ybar = ybar;
    c.resolution = h_;
    c.eps_term = 10.0 * cfg_.eps;
    const std::size_t nd = cfg_.delta_ladder.size();
    c.accepted_v.assign(nd, std::nullopt);
    c.accepted_w.assign(nd, std::nullopt);

    const auto& fine = rung(l1_.size() - 1, l2_.size() - 1);
    for (const auto& ch : fine)
      for (const auto& [d, an] : ch.opts)
        if (an > 0) c.worst_ratio = std::max(c.worst_ratio, (d - c.eps_term - h_) / an);
    for (double delta : cfg_.delta_ladder) {
      double best_q = 4.0;
      for (const auto& ch : fine) {
        double q = kInf;
        for (const auto& [d, an] : ch.opts) q = std::min(q, d / slack(delta, an));
        if (q > best_q) {
          best_q = q;
          Witness w;
          w.x = ch.x;
          w.x2 = ch.target;
          w.y = ch.a;
          w.dist = ch.opts.front().first;
          w.slack = slack(delta, ch.opts.front().second);
          w.delta = delta;
          c.witness = w;
        }
      }
      if (c.witness) {
        c.verdict = Verdict::refuted;
        c.pairs_checked = count();
        return c;
      }
    }
    bool all = true;
    for (std::size_t k = 0; k < nd; ++k) {
      bool found = false;
      for (std::size_t i = 0; i < l1_.size() && !found; ++i)
        for (std::size_t j = 0; j < l2_.size() && !found; ++j)
          if (passes(rung(i, j), cfg_.delta_ladder[k])) {
            c.accepted_v[k] = l1_[i];
            c.accepted_w[k] = l2_[j];
            found = true;
          }
      all = all && found;
    }
    c.verdict = all ? Verdict::verified_at_scale : Verdict::inconclusive;
    if (!all) c.diagnostics = "some delta has no accepted radius, and no violation exceeds 4x slack";
    c.pairs_checked = count();
    return c;
  }

 private:
  double slack(double delta, double an) const { return delta * an + 10.0 * cfg_.eps + h_; }

  bool passes(const std::vector<Check>& R, double delta) const {
    for (const auto& ch : R) {
      bool ok = false;
      for (const auto& [d, an] : ch.opts) ok = ok || d <= slack(delta, an);
      if (!ok) return false;
    }
    return true;
  }

  const std::vector<Check>& rung(std::size_t i, std::size_t j) {
    auto key = std::make_pair(i, j);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, build_(l1_[i], l2_[j], i * l2_.size() + j)).first;
    return it->second;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& [k, v] : cache_) n += v.size();
    return n;
  }

  std::vector<double> l1_, l2_;
  Builder build_;
  const CertConfig& cfg_;
  double h_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Check>> cache_;
};

struct GridSpec {
  int per_axis, jitter;
};

GridSpec x_grid(int n) { return n == 1 ? GridSpec{21, 1} : n == 2 ? GridSpec{5, 1} : GridSpec{3, 0}; }
GridSpec y_grid(int m) { return m == 1 ? GridSpec{11, 1} : m == 2 ? GridSpec{5, 0} : GridSpec{3, 0}; }

Polyhedron window(const Vec& c, double r) {
  if (c.size() == 1) return Polyhedron::box({c[0] - r}, {c[0] + r});
  return ball_inner(c, r);
}

void validate(const RegInstance& inst) {
  inst.cfg.validate();
  const SVMap& S = inst.S;
  if (S.backend != SVMap::Backend::PolyGraph)
    fail(Errc::OracleNotInvertible, "regularity certification needs S⁻¹, so a polyhedral graph");
  if (inst.T.dim_in != S.dim_out || inst.T.dim_out != S.dim_in)
    fail(Errc::DimensionMismatch, "T must map the output space of S to its input space");
  if (static_cast<int>(inst.point.x.size()) != S.dim_in || static_cast<int>(inst.point.y.size()) != S.dim_out)
    fail(Errc::DimensionMismatch, "base point dimensions");
  if (!on_graph(S, inst.point)) fail(Errc::NotOnGraph, "(x̄, ȳ) is not on the graph of S");
  if (inst.set_A_extra < 0) fail(Errc::InsufficientSamples, "set_A_extra must be nonnegative");
}

// Seeded companions in the r-ball for the set-A spot check.
std::vector<Vec> companions(int m, double r, int k, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec> out;
  for (int i = 0; i < k; ++i) {
    Vec v(m);
    for (auto& c : v) c = g(rng);
    const double nv = norm(v);
    out.push_back(nv > 0 ? scale(v, r * std::pow(u(rng), 1.0 / m) / nv) : v);
  }
  return out;
}

// Graph points (x, y') with x in V and y' in the source window: x grid with values of S, plus a
// y grid with values of S⁻¹ so thin windows around ȳ stay populated.
std::vector<std::pair<Vec, Vec>> graph_samples(const SVMap& S, const SVMap& Sinv, const Vec& xbar, double rx,
                                               const Polyhedron& src, const Vec& ybar, double ry,
                                               const CertConfig& cfg, unsigned long long seed) {
  const GridSpec gx = x_grid(S.dim_in), gy = y_grid(S.dim_out);
  const auto xs = neighborhood_grid(xbar, rx, gx.per_axis, gx.jitter, seed, S.domain);
  const auto ys = neighborhood_grid(ybar, ry, gy.per_axis, gy.jitter, seed + 29, std::nullopt);
  const Polyhedron vx = window(xbar, rx);
  std::vector<std::vector<std::pair<Vec, Vec>>> parts(xs.size() + ys.size());
  parallel_for(static_cast<int>(parts.size()), cfg.jobs, [&](int i) {
    if (i < static_cast<int>(xs.size())) {
      for (auto& y : sample_points(intersect(eval(S, xs[i]), src), cfg.samples_per_segment))
        parts[i].emplace_back(xs[i], std::move(y));
    } else {
      const Vec& y = ys[i - xs.size()];
      if (!src.contains(y)) return;
      for (auto& x : sample_points(intersect(slice_at(Sinv.graph, y), vx), cfg.samples_per_segment))
        parts[i].emplace_back(std::move(x), y);
    }
  });
  std::vector<std::pair<Vec, Vec>> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

enum class Form { MR, OC };

// y ranges over W; unrestricted lets y' = y - a range over S(x) in the truncation ball around ȳ.
Certificate run_mr(const RegInstance& inst, Form form, bool unrestricted) {
  validate(inst);
  const SVMap Sinv = invert(inst.S);
  const CertConfig& cfg = inst.cfg;
  const Vec &xbar = inst.point.x, &ybar = inst.point.y;
  const int m = inst.S.dim_out;
  const HomogMap& T = inst.T;
  auto dist = [&](const Vec& x, const Region& P, const Vec& a) {
    return form == Form::MR ? dist_to_shift(x, P, T, a) : dist_to_unshift(x, P, T, a);
  };
  Builder build = [&, m](double rx, double ry, std::size_t idx) {
    const GridSpec gy = y_grid(m);
    const unsigned long long seed = cfg.seed * 1000003ULL + idx;
    const auto ys = neighborhood_grid(ybar, ry, gy.per_axis, gy.jitter, seed + 17, std::nullopt);
    std::vector<Region> pre(ys.size());
    parallel_for(static_cast<int>(ys.size()), cfg.jobs, [&](int j) { pre[j] = slice_at(Sinv.graph, ys[j]); });
    const Polyhedron src = unrestricted ? truncation_box(Ball{ybar, cfg.truncation.radius}) : window(ybar, ry);
    const auto gs = graph_samples(inst.S, Sinv, xbar, rx, src, ybar, ry, cfg, seed);
    std::vector<std::vector<Check>> per(gs.size());
    parallel_for(static_cast<int>(gs.size()), cfg.jobs, [&](int i) {
      const auto& [x, yp] = gs[i];
      for (std::size_t j = 0; j < ys.size(); ++j) {
        const Vec a = sub(ys[j], yp);
        const double an = norm(a);
        if (an <= 1e-12) continue;
        Check ch{{{dist(x, pre[j], a), an}}, x, ys[j], a};
        if (inst.set_A_extra > 0)
          for (const auto& b : companions(m, 2.0 * ry, inst.set_A_extra, seed ^ (i * 7919ULL + j)))
            ch.opts.emplace_back(dist(x, pre[j], b), norm(b));
        per[i].push_back(std::move(ch));
      }
    });
    std::vector<Check> out;
    for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
    return out;
  };
  Ladder L(cfg.w_ladder, cfg.radius_ladder, build, cfg, 0.0);
  return L.run(form == Form::MR ? Notion::metricRegular : Notion::openCovering, xbar, ybar);
}

// Halfspace rows of C x R^m.
std::vector<Halfspace> lift(const Polyhedron& C, int m) {
  const int n = C.dim();
  std::vector<int> coords(n);
  for (int i = 0; i < n; ++i) coords[i] = i;
  return embed(C, n + m, coords);
}

bool zero_in_all_values(const HomogMap& T) {
  const Vec zero(T.dim_out, 0.0);
  if (!eval(T, Vec(T.dim_in, 0.0)).contains(zero, 1e-9)) return false;
  for (const auto& u : unit_directions(T.dim_in, 32))
    if (!eval(T, u).contains(zero, 1e-9)) return false;
  return true;
}

}  // namespace

Certificate certify_mr(const RegInstance& inst) { return run_mr(inst, Form::MR, false); }

Certificate certify_oc(const RegInstance& inst) { return run_mr(inst, Form::OC, false); }

Certificate certify_msr(const RegInstance& inst) {
  validate(inst);
  const CertConfig& cfg = inst.cfg;
  const Vec &xbar = inst.point.x, &ybar = inst.point.y;
  const SVMap Sinv = invert(inst.S);
  const Region P = slice_at(Sinv.graph, ybar);
  const int m = inst.S.dim_out;
  Builder build = [&, m](double rx, double r, std::size_t idx) {
    const unsigned long long seed = cfg.seed * 1000003ULL + idx;
    const auto gs = graph_samples(inst.S, Sinv, xbar, rx, window(ybar, r), ybar, r, cfg, seed);
    std::vector<std::vector<Check>> per(gs.size());
    parallel_for(static_cast<int>(gs.size()), cfg.jobs, [&](int i) {
      const auto& [x, yp] = gs[i];
      const Vec a = sub(ybar, yp);
      const double an = norm(a);
      if (an <= 1e-12) return;
      Check ch{{{dist_to_shift(x, P, inst.T, a), an}}, x, ybar, a};
      if (inst.set_A_extra > 0)
        for (const auto& b : companions(m, r, inst.set_A_extra, seed ^ (i * 7919ULL)))
          ch.opts.emplace_back(dist_to_shift(x, P, inst.T, b), norm(b));
      per[i].push_back(std::move(ch));
    });
    std::vector<Check> out;
    for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
    return out;
  };
  Ladder L(cfg.w_ladder, cfg.radius_ladder, build, cfg, 0.0);
  return L.run(Notion::metricSubregular, xbar, ybar);
}

EquivalenceRecord equivalence_harness(const SVMap& S, const GraphPoint& point, const HomogMap& T,
                                      const CertConfig& cfg) {
  EquivalenceRecord rec;
  rec.mr = certify_mr({S, point, scale_input(T, -1.0), cfg});
  rec.oc = certify_oc({S, point, reflect(T), cfg});
  rec.it = certify_pseudo(invert(S), target(T), point.y, point.x, Notion::pseudoStrictT, cfg);
  rec.agree = rec.mr.verdict == rec.oc.verdict && rec.oc.verdict == rec.it.verdict;
  return rec;
}

SubregRecord subreg_harness(const SVMap& S, const GraphPoint& point, const HomogMap& T, const CertConfig& cfg) {
  SubregRecord rec;
  rec.msr = certify_msr({S, point, scale_input(T, -1.0), cfg});
  rec.outer_it = certify_pseudo(invert(S), target(T), point.y, point.x, Notion::pseudoOuterT, cfg);
  rec.agree = rec.msr.verdict == rec.outer_it.verdict;
  return rec;
}

HomogMap ct_reduce(const Region& Creg, const HomogMap& T) {
  if (Creg.pieces.size() != 1) fail(Errc::NotReachable, "ct_reduce needs a single convex C");
  const Polyhedron& C = Creg.pieces[0];
  const int n = C.dim(), m = T.dim_out;
  if (n != T.dim_in) fail(Errc::DimensionMismatch, "C lives in the input space of T");
  if (C.empty() || !C.bounded()) fail(Errc::HypothesisFailure, "C must be a nonempty bounded set");
  const auto hs = C.hrep();
  for (const auto& h : hs)
    if (h.offset <= kEps * norm(h.normal)) fail(Errc::GaugeUnbounded, "0 is not an interior point of C");

  // T(C) = projection of gph T ∩ (C x R^m) onto the value coordinates
  const HomogMap Tc = to_cone(T);
  const auto rows = lift(C, m);
  std::vector<Polyhedron> TC;
  for (const auto& p : Tc.graph.pieces) {
    const Polyhedron q = p.meet(rows);
    if (q.empty()) continue;
    std::vector<Vec> vs, rs;
    for (const auto& v : q.vertices()) vs.push_back(slice(v, n, m));
    for (const auto& r : q.rays()) {
      Vec s = slice(r, n, m);
      if (norm(s) > kEps) rs.push_back(s);
    }
    TC.push_back(Polyhedron::from_v(m, vs, rs));
  }

  // gauge is linear on the cone over each facet, so the graph over that cone is cone(F x P)
  Region g(n + m);
  const auto verts = C.vertices();
  for (const auto& h : hs) {
    std::vector<Vec> facet;
    for (const auto& v : verts)
      if (std::abs(dot(h.normal, v) - h.offset) <= 1e-9 * (1.0 + std::abs(h.offset))) facet.push_back(v);
    if (static_cast<int>(facet.size()) < n) continue;
    for (const auto& P : TC) {
      std::vector<Vec> rays;
      for (const auto& f : facet)
        for (const auto& v : P.vertices()) rays.push_back(concat(f, v));
      for (const auto& r : P.rays()) rays.push_back(concat(Vec(n, 0.0), r));
      g.add(Polyhedron::from_v(n + m, {Vec(n + m, 0.0)}, rays));
    }
  }
  return HomogMap::cone(n, m, g);
}

AltDefsRecord alt_defs_check(const SVMap& S, const GraphPoint& point, const HomogMap& T, const CertConfig& cfg) {
  if (!zero_in_all_values(T)) fail(Errc::HypothesisFailure, "T⁻¹(0) != Y: some sampled T(y) misses 0");
  AltDefsRecord rec;
  const RegInstance inst{S, point, T, cfg};
  rec.constrained = run_mr(inst, Form::MR, false);
  rec.unconstrained = run_mr(inst, Form::MR, true);
  rec.agree = rec.constrained.verdict == rec.unconstrained.verdict;
  return rec;
}

namespace {

Certificate strict_with_bases(const SVMap& S, const GraphPoint& pt, const HomogMap& T, const CertConfig& cfg,
                              bool extended) {
  cfg.validate();
  if (!on_graph(S, pt)) fail(Errc::NotOnGraph, "(x̄, ȳ) is not on the graph of S");
  if (T.dim_in != S.dim_in || T.dim_out != S.dim_out) fail(Errc::DimensionMismatch, "T dimensions");
  const int n = S.dim_in;
  Builder build = [&, n](double rv, double rw, std::size_t idx) {
    const GridSpec gx = n == 1 ? GridSpec{21, 1} : x_grid(n);
    const unsigned long long seed = cfg.seed * 1000003ULL + idx;
    const auto xs = neighborhood_grid(pt.x, rv, gx.per_axis, gx.jitter, seed, S.domain);
    auto bases = xs;
    if (extended) {
      for (const auto& b : neighborhood_grid(pt.x, cfg.truncation.radius, gx.per_axis, 0, seed + 5, S.domain))
        bases.push_back(b);
    }
    std::vector<Region> vals(bases.size());
    parallel_for(static_cast<int>(bases.size()), cfg.jobs, [&](int i) { vals[i] = eval(S, bases[i]); });
    std::vector<std::vector<Check>> per_x(xs.size());
    parallel_for(static_cast<int>(xs.size()), cfg.jobs, [&](int i) {
      const auto ys = sample_points(intersect(vals[i], window(pt.y, rw)), cfg.samples_per_segment);
      for (std::size_t j = 0; j < bases.size(); ++j) {
        const Vec w = sub(xs[i], bases[j]);
        const double wn = norm(w);
        if (wn <= 1e-12) continue;
        for (const auto& y : ys) per_x[i].push_back({{{dist_to_shift(y, vals[j], T, w), wn}}, xs[i], bases[j], y});
      }
    });
    std::vector<Check> out;
    for (auto& v : per_x) out.insert(out.end(), v.begin(), v.end());
    return out;
  };
  Ladder L(cfg.radius_ladder, cfg.w_ladder, build, cfg, S.resolution);
  return L.run(Notion::pseudoStrictT, pt.x, pt.y);
}

}  // namespace

ExtendedStrictRecord extended_strict_check(const SVMap& S, const GraphPoint& point, const HomogMap& T,
                                           const CertConfig& cfg) {
  ExtendedStrictRecord rec;
  rec.local = strict_with_bases(S, point, T, cfg, false);
  rec.extended = strict_with_bases(S, point, T, cfg, true);
  rec.agree = rec.local.verdict == rec.extended.verdict;
  return rec;
}

}  // namespace tdiff
