#include "tdiff/certify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <thread>

namespace tdiff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct NotionName {
  Notion n;
  const char* s;
};

constexpr NotionName kNotionNames[] = {
    {Notion::outerT, "outerT"},           {Notion::innerT, "innerT"},
    {Notion::T, "T"},                     {Notion::strictT, "strictT"},
    {Notion::pseudoOuterT, "pseudoOuterT"}, {Notion::pseudoInnerT, "pseudoInnerT"},
    {Notion::pseudoT, "pseudoT"},         {Notion::pseudoStrictT, "pseudoStrictT"},
    {Notion::calm, "calm"},               {Notion::aubin, "aubin"},
    {Notion::singleT, "singleT"},         {Notion::singleStrictT, "singleStrictT"},
    {Notion::metricRegular, "metricRegular"}, {Notion::openCovering, "openCovering"},
    {Notion::metricSubregular, "metricSubregular"},
};

bool strictly_decreasing(const std::vector<double>& v) {
  for (size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0) || !std::isfinite(v[i])) return false;
    if (i > 0 && !(v[i] < v[i - 1])) return false;
  }
  return !v.empty();
}

Vec mat_vec(const Matrix& A, const Vec& w) {
  Vec out(A.rows(), 0.0);
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) out[i] += A(i, j) * w[j];
  return out;
}

struct GridSpec {
  int per_axis;
  int jitter;
};

// Budgets keep pair counts near a few thousand per rung.
GridSpec grid_spec(int n, bool pairs, int g) {
  if (n == 1) return {g, 2};
  if (n == 2) return pairs ? GridSpec{5, 4} : GridSpec{(g + 1) / 2, 4};
  return pairs ? GridSpec{3, 0} : GridSpec{5, 2 * n};
}

// Right side A + sign T(w) + extra |w| B, prepared once per pair.
class Rhs {
 public:
  Rhs(const Region& A, const Target& tg, const Vec& w, double sign) : A_(A) {
    const double nw = norm(w);
    shrink_ = tg.extra * nw;
    if (A.empty()) {
      empty_ = true;
      return;
    }
    const HomogMap& T = tg.T;
    if (T.kind == HomogMap::Kind::BallMap) {
      shrink_ += T.kappa * nw;
    } else if (T.kind == HomogMap::Kind::MatrixBundle && T.mats.size() == 1) {
      shift_ = scale(mat_vec(T.mats[0], w), sign);
    } else {
      Region t = eval(T, w);
      if (t.empty()) {
        empty_ = true;
        return;
      }
      if (sign < 0) {
        Region neg(t.dim);
        for (const auto& p : t.pieces) neg.add(p.negate());
        t = neg;
      }
      sum_ = minkowski_sum(A, t);
    }
  }

  double dist(const Vec& y) const {
    if (empty_) return kInf;
    double d;
    if (sum_) d = dist_point_region(y, *sum_);
    else if (shift_) d = dist_point_region(sub(y, *shift_), A_);
    else d = dist_point_region(y, A_);
    return std::max(0.0, d - shrink_);
  }

 private:
  const Region& A_;
  bool empty_ = false;
  double shrink_ = 0.0;
  std::optional<Vec> shift_;
  std::optional<Region> sum_;
};

enum class Mode { Outer, Inner, Strict };

struct PairEval {
  int left = 0;   // index of the point whose value is sampled
  int base = 0;   // index of the right-side base point
  double wn = 0;  // |w|
  std::vector<double> dist;   // per W rung
  std::vector<int> arg;       // argmax sample per W rung
};

struct RungEval {
  std::vector<Vec> pts;
  std::vector<Region> vals;
  std::vector<std::vector<std::vector<Vec>>> samples;  // [point][w rung]
  std::vector<PairEval> pairs;
};

class Engine {
 public:
  Engine(const SVMap& S, const Target& tg, Vec xbar, std::optional<Vec> ybar, Mode mode, const CertConfig& cfg)
      : S_(S), tg_(tg), xbar_(std::move(xbar)), ybar_(std::move(ybar)), mode_(mode), cfg_(cfg) {
    trunc_ = cfg.truncation;
    if (static_cast<int>(trunc_.center.size()) != S.dim_out) trunc_.center = Vec(S.dim_out, 0.0);
    if (ybar_) {
      wr_ = cfg.w_ladder;
    } else {
      wr_ = {kInf};
    }
    h_ = S.resolution;
    eps_term_ = 10.0 * cfg.eps;
    rungs_.resize(cfg.radius_ladder.size());
  }

  double slack(double delta, double wn) const { return delta * wn + eps_term_ + h_; }

  const RungEval& rung(size_t i) {
    if (!rungs_[i]) rungs_[i] = build(cfg_.radius_ladder[i], i);
    return *rungs_[i];
  }

  bool passes(const RungEval& R, size_t iw, double delta) const {
    for (const auto& p : R.pairs)
      if (p.dist[iw] > slack(delta, p.wn)) return false;
    return true;
  }

  // Pair with the largest dist/slack among strong violations (dist > 4 slack).
  std::optional<Witness> strong(const RungEval& R, size_t iw, double delta) const {
    std::optional<Witness> best;
    double best_q = 4.0;
    for (const auto& p : R.pairs) {
      const double sl = slack(delta, p.wn);
      const double q = p.dist[iw] / sl;
      if (q > best_q) {
        best_q = q;
        best = make_witness(R, p, iw, delta);
      }
    }
    return best;
  }

  Witness make_witness(const RungEval& R, const PairEval& p, size_t iw, double delta) const {
    Witness w;
    w.x = R.pts[p.left];
    w.x2 = R.pts[p.base];
    const auto& smp = mode_ == Mode::Inner ? inner_samples(R)[iw] : R.samples[p.left][iw];
    w.y = smp[p.arg[iw]];
    w.dist = p.dist[iw];
    w.slack = slack(delta, p.wn);
    w.delta = delta;
    return w;
  }

  double worst_ratio(const RungEval& R, size_t iw) const {
    double q = 0.0;
    for (const auto& p : R.pairs) q = std::max(q, (p.dist[iw] - eps_term_ - h_) / p.wn);
    return q;
  }

  Certificate run(Notion notion) {
    Certificate c;
    c.notion = notion;
    c.config = cfg_;
    c.xbar = xbar_;
    c.ybar = ybar_;
    c.resolution = h_;
    c.eps_term = eps_term_;
    c.inflation = tg_.extra;
    const size_t nv = cfg_.radius_ladder.size(), nw = wr_.size(), nd = cfg_.delta_ladder.size();
    c.accepted_v.assign(nd, std::nullopt);
    c.accepted_w.assign(nd, std::nullopt);

    const RungEval& fine = rung(nv - 1);
    c.worst_ratio = worst_ratio(fine, nw - 1);
    for (size_t k = 0; k < nd; ++k) {
      if (auto w = strong(fine, nw - 1, cfg_.delta_ladder[k])) {
        c.verdict = Verdict::refuted;
        c.witness = w;
        c.pairs_checked = count_pairs();
        return c;
      }
    }
    bool all = true;
    for (size_t k = 0; k < nd; ++k) {
      const double delta = cfg_.delta_ladder[k];
      bool found = false;
      for (size_t iv = 0; iv < nv && !found; ++iv) {
        const RungEval& R = rung(iv);
        for (size_t iw = 0; iw < nw && !found; ++iw)
          if (passes(R, iw, delta)) {
            c.accepted_v[k] = cfg_.radius_ladder[iv];
            if (ybar_) c.accepted_w[k] = wr_[iw];
            found = true;
          }
      }
      all = all && found;
    }
    c.verdict = all ? Verdict::verified_at_scale : Verdict::inconclusive;
    if (!all) c.diagnostics = "some delta has no accepted radius, and no violation exceeds 3x slack";
    c.pairs_checked = count_pairs();
    return c;
  }

  // Per rung sup of excess/|w| over the finest W; used by the modulus estimators.
  std::vector<double> ratios() {
    std::vector<double> out;
    for (size_t i = 0; i < cfg_.radius_ladder.size(); ++i) {
      const RungEval& R = rung(i);
      double q = 0.0;
      for (const auto& p : R.pairs) q = std::max(q, std::max(0.0, p.dist.back() - h_) / p.wn);
      out.push_back(q);
    }
    return out;
  }

  void set_grid_override(GridSpec g) { override_ = g; }

 private:
  std::size_t count_pairs() const {
    std::size_t n = 0;
    for (const auto& r : rungs_)
      if (r) n += r->pairs.size();
    return n;
  }

  const std::vector<std::vector<Vec>>& inner_samples(const RungEval& R) const { return R.samples[0]; }

  std::vector<Vec> left_samples(const Region& v, double rw) const {
    Region r(v.dim);
    if (std::isfinite(rw)) {
      Polyhedron win = S_.dim_out == 1 ? Polyhedron::box({(*ybar_)[0] - rw}, {(*ybar_)[0] + rw})
                                       : ball_inner(*ybar_, rw);
      r = intersect(v, win);
    } else {
      const Polyhedron box = truncation_box(trunc_);
      for (const auto& p : v.pieces) r.add(p.bounded() ? p : p.meet(box));
    }
    return sample_points(r, cfg_.samples_per_segment);
  }

  RungEval build(double r, size_t idx) {
    RungEval R;
    const bool pairs = mode_ == Mode::Strict;
    const GridSpec g = override_ ? *override_ : grid_spec(S_.dim_in, pairs, cfg_.grid_per_axis);
    R.pts = neighborhood_grid(xbar_, r, g.per_axis, g.jitter, cfg_.seed * 1000003ULL + idx, S_.domain);
    const int np = static_cast<int>(R.pts.size());
    R.vals.resize(np);
    parallel_for(np, cfg_.jobs, [&](int i) { R.vals[i] = eval(S_, R.pts[i]); });
    R.samples.resize(np);
    const size_t nw = wr_.size();
    auto fill = [&](int i) {
      R.samples[i].resize(nw);
      for (size_t iw = 0; iw < nw; ++iw) R.samples[i][iw] = left_samples(R.vals[i], wr_[iw]);
    };
    // point 0 is x̄
    if (mode_ == Mode::Inner) fill(0);
    else parallel_for(np, cfg_.jobs, fill);

    std::vector<std::pair<int, int>> idx_pairs;
    if (mode_ == Mode::Strict) {
      for (int i = 0; i < np; ++i)
        for (int j = 0; j < np; ++j)
          if (i != j) idx_pairs.emplace_back(i, j);
    } else {
      for (int i = 1; i < np; ++i) idx_pairs.emplace_back(mode_ == Mode::Inner ? 0 : i, mode_ == Mode::Inner ? i : 0);
    }
    R.pairs.resize(idx_pairs.size());
    parallel_for(static_cast<int>(idx_pairs.size()), cfg_.jobs, [&](int k) {
      auto [l, b] = idx_pairs[k];
      PairEval& p = R.pairs[k];
      p.left = l;
      p.base = b;
      // inner: w = x - x̄ with x the base point
      const Vec w = mode_ == Mode::Inner ? sub(R.pts[b], R.pts[l]) : sub(R.pts[l], R.pts[b]);
      p.wn = norm(w);
      const Rhs rhs(R.vals[b], tg_, w, mode_ == Mode::Inner ? -1.0 : 1.0);
      p.dist.assign(nw, 0.0);
      p.arg.assign(nw, 0);
      for (size_t iw = 0; iw < nw; ++iw) {
        const auto& smp = R.samples[l][iw];
        for (size_t s = 0; s < smp.size(); ++s) {
          const double d = rhs.dist(smp[s]);
          if (d > p.dist[iw]) {
            p.dist[iw] = d;
            p.arg[iw] = static_cast<int>(s);
          }
          if (std::isinf(d)) break;
        }
      }
    });
    return R;
  }

  const SVMap& S_;
  const Target& tg_;
  Vec xbar_;
  std::optional<Vec> ybar_;
  Mode mode_;
  const CertConfig& cfg_;
  Ball trunc_;
  std::vector<double> wr_;
  double h_ = 0.0;
  double eps_term_ = 0.0;
  std::optional<GridSpec> override_;
  std::vector<std::optional<RungEval>> rungs_;
};

Certificate combine(Notion notion, const Certificate& outer, const Certificate& inner) {
  Certificate c = outer;
  c.notion = notion;
  if (outer.verdict == Verdict::refuted || inner.verdict == Verdict::refuted) {
    const Certificate& bad = outer.verdict == Verdict::refuted ? outer : inner;
    c.verdict = Verdict::refuted;
    c.witness = bad.witness;
    c.diagnostics = std::string(bad.notion == Notion::innerT || bad.notion == Notion::pseudoInnerT ? "inner" : "outer") +
                    " inclusion refuted";
  } else if (outer.verdict == Verdict::verified_at_scale && inner.verdict == Verdict::verified_at_scale) {
    c.verdict = Verdict::verified_at_scale;
    for (size_t k = 0; k < c.accepted_v.size(); ++k) {
      c.accepted_v[k] = std::min(*outer.accepted_v[k], *inner.accepted_v[k]);
      if (outer.accepted_w[k] && inner.accepted_w[k]) c.accepted_w[k] = std::min(*outer.accepted_w[k], *inner.accepted_w[k]);
    }
  } else {
    c.verdict = Verdict::inconclusive;
    c.diagnostics = "outer: " + std::string(verdict_name(outer.verdict)) + ", inner: " + verdict_name(inner.verdict);
  }
  c.worst_ratio = std::max(outer.worst_ratio, inner.worst_ratio);
  c.pairs_checked = outer.pairs_checked + inner.pairs_checked;
  return c;
}

void check_target(const SVMap& S, const Target& tg) {
  if (tg.T.dim_in != S.dim_in || tg.T.dim_out != S.dim_out)
    fail(Errc::DimensionMismatch, "T dimensions do not match S");
  if (tg.extra < 0) fail(Errc::HypothesisFailure, "negative inflation");
}

void check_on_graph(const SVMap& S, const Vec& xbar, const Vec& ybar) {
  if (static_cast<int>(ybar.size()) != S.dim_out) fail(Errc::DimensionMismatch, "ybar dimension");
  const Region v = eval(S, xbar);
  if (v.empty() || dist_point_region(ybar, v) > 1e-7 + S.resolution) fail(Errc::NotOnGraph, "ybar is not in S(xbar)");
}

Certificate run_mode(const SVMap& S, const Target& tg, const Vec& xbar, const std::optional<Vec>& ybar, Mode mode,
                     Notion notion, const CertConfig& cfg) {
  Engine e(S, tg, xbar, ybar, mode, cfg);
  return e.run(notion);
}

}  // namespace

const char* notion_name(Notion n) {
  for (const auto& e : kNotionNames)
    if (e.n == n) return e.s;
  return "?";
}

Notion notion_from_name(const std::string& s) {
  for (const auto& e : kNotionNames)
    if (s == e.s) return e.n;
  fail(Errc::UnknownName, "unknown notion '" + s + "'");
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::verified_at_scale: return "verified_at_scale";
    case Verdict::refuted: return "refuted";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

const char* modulus_kind_name(ModulusKind k) {
  switch (k) {
    case ModulusKind::clm: return "clm";
    case ModulusKind::lip: return "lip";
    case ModulusKind::clm_at_for: return "clm_at_for";
    case ModulusKind::lip_at_for: return "lip_at_for";
  }
  return "?";
}

void CertConfig::validate() const {
  if (!strictly_decreasing(delta_ladder)) fail(Errc::HypothesisFailure, "delta ladder must be strictly decreasing and positive");
  if (!strictly_decreasing(radius_ladder)) fail(Errc::HypothesisFailure, "radius ladder must be strictly decreasing and positive");
  if (!strictly_decreasing(w_ladder)) fail(Errc::HypothesisFailure, "W ladder must be strictly decreasing and positive");
  if (grid_per_axis < 3 || grid_per_axis % 2 == 0) fail(Errc::HypothesisFailure, "grid_per_axis must be odd and >= 3");
  if (!(truncation.radius > 0)) fail(Errc::HypothesisFailure, "truncation radius must be positive");
}

Target target(const HomogMap& T) { return Target{T, 0.0}; }
Target target(const Inflation& I) { return Target{I.base, I.total()}; }

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || count < 2) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(jobs, count); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

std::vector<Vec> neighborhood_grid(const Vec& center, double r, int per_axis, int jitter_per_cell,
                                   unsigned long long seed, const std::optional<Box>& domain) {
  const int n = static_cast<int>(center.size());
  const int half = per_axis / 2;
  const double step = half > 0 ? r / half : r;
  std::vector<Vec> out{center};
  auto keep = [&](const Vec& p) { return !domain || domain->contains(p); };
  std::vector<int> idx(n, -half);
  while (true) {
    Vec p(n);
    bool is_center = true;
    for (int i = 0; i < n; ++i) {
      p[i] = center[i] + idx[i] * step;
      is_center = is_center && idx[i] == 0;
    }
    if (!is_center && keep(p)) out.push_back(p);
    int k = 0;
    while (k < n && ++idx[k] > half) idx[k++] = -half;
    if (k == n) break;
  }
  if (jitter_per_cell > 0 && half > 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<int> cell(n, -half);
    while (true) {
      for (int j = 0; j < jitter_per_cell; ++j) {
        Vec p(n);
        for (int i = 0; i < n; ++i) p[i] = center[i] + (cell[i] + U(rng)) * step;
        if (keep(p)) out.push_back(p);
      }
      int k = 0;
      while (k < n && ++cell[k] > half - 1) cell[k++] = -half;
      if (k == n) break;
    }
  }
  return out;
}

Certificate certify_setvalued(const SVMap& S, const Target& T, const Vec& xbar, Notion notion, const CertConfig& cfg) {
  cfg.validate();
  check_target(S, T);
  if (S.domain && !S.domain->contains(xbar)) fail(Errc::OutsideDomain, "xbar outside the domain");
  switch (notion) {
    case Notion::outerT:
    case Notion::singleT:
      return run_mode(S, T, xbar, std::nullopt, Mode::Outer, notion, cfg);
    case Notion::innerT:
      return run_mode(S, T, xbar, std::nullopt, Mode::Inner, notion, cfg);
    case Notion::strictT:
    case Notion::singleStrictT:
      return run_mode(S, T, xbar, std::nullopt, Mode::Strict, notion, cfg);
    case Notion::T:
      return combine(Notion::T, run_mode(S, T, xbar, std::nullopt, Mode::Outer, Notion::outerT, cfg),
                     run_mode(S, T, xbar, std::nullopt, Mode::Inner, Notion::innerT, cfg));
    case Notion::calm:
      if (T.T.kind != HomogMap::Kind::BallMap) fail(Errc::HypothesisFailure, "calm needs a ball map");
      return run_mode(S, T, xbar, std::nullopt, Mode::Outer, notion, cfg);
    default:
      fail(Errc::HypothesisFailure, std::string("notion ") + notion_name(notion) + " needs ybar; use certify_pseudo");
  }
}

Certificate certify_pseudo(const SVMap& S, const Target& T, const Vec& xbar, const Vec& ybar, Notion notion,
                           const CertConfig& cfg) {
  cfg.validate();
  check_target(S, T);
  if (S.domain && !S.domain->contains(xbar)) fail(Errc::OutsideDomain, "xbar outside the domain");
  check_on_graph(S, xbar, ybar);
  switch (notion) {
    case Notion::pseudoOuterT:
    case Notion::calm:
      return run_mode(S, T, xbar, ybar, Mode::Outer, notion, cfg);
    case Notion::pseudoInnerT:
      return run_mode(S, T, xbar, ybar, Mode::Inner, notion, cfg);
    case Notion::pseudoStrictT:
    case Notion::aubin:
      return run_mode(S, T, xbar, ybar, Mode::Strict, notion, cfg);
    case Notion::pseudoT:
      return combine(Notion::pseudoT, run_mode(S, T, xbar, ybar, Mode::Outer, Notion::pseudoOuterT, cfg),
                     run_mode(S, T, xbar, ybar, Mode::Inner, Notion::pseudoInnerT, cfg));
    default:
      fail(Errc::HypothesisFailure, std::string("notion ") + notion_name(notion) + " is not a pseudo notion");
  }
}

Certificate certify_single(const Fn& f, const Target& T, const Vec& xbar, bool strict, const CertConfig& cfg) {
  const double r = cfg.radius_ladder.empty() ? 1.0 : cfg.radius_ladder.front();
  Vec lo = xbar, hi = xbar;
  for (auto& v : lo) v -= r;
  for (auto& v : hi) v += r;
  Vec y0;
  try {
    y0 = f(xbar);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(Errc::EvaluationFailure, e.what());
  }
  SVMap S = from_function("f", static_cast<int>(xbar.size()), static_cast<int>(y0.size()), f, Box{lo, hi});
  return certify_setvalued(S, T, xbar, strict ? Notion::singleStrictT : Notion::singleT, cfg);
}

Certificate certify_calm(const SVMap& S, double kappa, const Vec& xbar, const std::optional<Vec>& ybar,
                         const CertConfig& cfg) {
  const Target t = target(HomogMap::ball(S.dim_in, S.dim_out, kappa));
  if (ybar) return certify_pseudo(S, t, xbar, *ybar, Notion::calm, cfg);
  return certify_setvalued(S, t, xbar, Notion::calm, cfg);
}

Certificate certify_aubin(const SVMap& S, double kappa, const Vec& xbar, const Vec& ybar, const CertConfig& cfg) {
  return certify_pseudo(S, target(HomogMap::ball(S.dim_in, S.dim_out, kappa)), xbar, ybar, Notion::aubin, cfg);
}

bool recheck_witness(const Certificate& c, const SVMap& S, const Target& T) {
  if (!c.witness) return false;
  const Witness& w = *c.witness;
  SVMap fine = S;
  fine.resolution = S.resolution / 2;
  const bool combined = c.notion == Notion::T || c.notion == Notion::pseudoT;
  const bool inner = c.notion == Notion::innerT || c.notion == Notion::pseudoInnerT ||
                     (combined && c.diagnostics.rfind("inner", 0) == 0);
  // left side: y must still lie in S(x) at the finer resolution
  const Region left = eval(fine, w.x);
  if (left.empty() || dist_point_region(w.y, left) > S.resolution + 1e-7) return false;
  const Vec step = inner ? sub(w.x2, w.x) : sub(w.x, w.x2);
  const Region base = eval(fine, w.x2);
  const Rhs rhs(base, T, step, inner ? -1.0 : 1.0);
  const double slack = w.delta * norm(step) + c.eps_term + fine.resolution;
  return rhs.dist(w.y) > slack;
}

namespace {

Modulus estimate(const SVMap& S, const Vec& xbar, const std::optional<Vec>& ybar, const CertConfig& cfg, bool lip) {
  cfg.validate();
  if (ybar) check_on_graph(S, xbar, *ybar);
  CertConfig c = cfg;
  if (ybar) c.w_ladder = {cfg.w_ladder.back()};
  const Target zero = target(HomogMap::zero(S.dim_in, S.dim_out));
  Engine e(S, zero, xbar, ybar, lip ? Mode::Strict : Mode::Outer, c);
  // lattice only: jitter makes the divergence trend noisy
  const GridSpec g = grid_spec(S.dim_in, lip, cfg.grid_per_axis);
  e.set_grid_override({S.dim_in == 2 && lip ? 11 : g.per_axis, 0});
  Modulus m;
  m.kind = lip ? (ybar ? ModulusKind::lip_at_for : ModulusKind::lip) : (ybar ? ModulusKind::clm_at_for : ModulusKind::clm);
  m.radii = cfg.radius_ladder;
  m.per_rung = e.ratios();
  // trend from the first rung with a positive ratio; a coarse lattice can miss the structure entirely
  std::size_t k0 = 0;
  while (k0 + 1 < m.per_rung.size() && !(m.per_rung[k0] > 1e-9)) ++k0;
  const double first = m.per_rung[k0], last = m.per_rung.back();
  const double span = std::log(m.radii[k0] / m.radii.back());
  const bool diverges = std::isinf(last) || (first > 1e-9 && last > 2.0 * first && span > 0 &&
                                             std::log(last / first) / span > 0.25);
  m.value = diverges ? kInf : last;
  return m;
}

Notion plain_of(Notion n) {
  switch (n) {
    case Notion::pseudoOuterT: return Notion::outerT;
    case Notion::pseudoInnerT: return Notion::innerT;
    case Notion::pseudoT: return Notion::T;
    case Notion::pseudoStrictT: return Notion::strictT;
    default: fail(Errc::HypothesisFailure, "globalize needs pseudo certificates");
  }
}

}  // namespace

Modulus estimate_clm(const SVMap& S, const Vec& xbar, const std::optional<Vec>& ybar, const CertConfig& cfg) {
  return estimate(S, xbar, ybar, cfg, false);
}

Modulus estimate_lip(const SVMap& S, const Vec& xbar, const std::optional<Vec>& ybar, const CertConfig& cfg) {
  return estimate(S, xbar, ybar, cfg, true);
}

Certificate globalize(const std::vector<Certificate>& pointwise, const SVMap& S, const Target& T, const Vec& xbar,
                      const CertConfig& cfg) {
  if (pointwise.empty()) fail(Errc::CoverageGap, "empty net");
  const Notion plain = plain_of(pointwise.front().notion);
  for (const auto& c : pointwise) {
    if (!c.ybar) fail(Errc::CoverageGap, "pointwise certificate without ybar");
    if (plain_of(c.notion) != plain) fail(Errc::HypothesisFailure, "mixed notions in the net");
  }
  Ball trunc = cfg.truncation;
  if (static_cast<int>(trunc.center.size()) != S.dim_out) trunc.center = Vec(S.dim_out, 0.0);
  // each net point covers the W window it was certified with
  for (const auto& y : sample_points(truncate(eval(S, xbar), trunc), cfg.samples_per_segment)) {
    bool covered = false;
    for (const auto& c : pointwise) {
      double rw = c.config.w_ladder.back();
      if (c.verdict == Verdict::verified_at_scale) {
        rw = kInf;
        for (const auto& a : c.accepted_w)
          if (a) rw = std::min(rw, *a);
      }
      if (norm(sub(y, *c.ybar)) <= rw + kEps) {
        covered = true;
        break;
      }
    }
    if (!covered) {
      std::string msg = "S(xbar) point (";
      for (size_t i = 0; i < y.size(); ++i) msg += (i ? ", " : "") + std::to_string(y[i]);
      fail(Errc::CoverageGap, msg + ") is outside every net window");
    }
  }
  Verdict predicted = Verdict::verified_at_scale;
  for (const auto& c : pointwise) {
    if (c.verdict == Verdict::refuted) predicted = Verdict::refuted;
    else if (c.verdict == Verdict::inconclusive && predicted != Verdict::refuted) predicted = Verdict::inconclusive;
  }
  Certificate direct = certify_setvalued(S, T, xbar, plain, cfg);
  if (direct.verdict == predicted) {
    direct.diagnostics = "aggregate of " + std::to_string(pointwise.size()) + " pseudo certificates agrees";
  } else {
    direct.diagnostics = std::string("aggregate predicted ") + verdict_name(predicted) + ", direct run gave " +
                         verdict_name(direct.verdict);
    direct.verdict = Verdict::inconclusive;
  }
  return direct;
}

}  // namespace tdiff
