#include "tdiff/strictify.hpp"

#include <algorithm>
#include <cmath>

namespace tdiff {

namespace {


[[noreturn]] void hypothesis(const std::string& what) { fail(Errc::HypothesisFailure, what); }

Polyhedron window(const Vec& c, double r) {
  if (c.size() == 1) return Polyhedron::box({c[0] - r}, {c[0] + r});
  return ball_inner(c, r);
}

bool in_domain(const SVMap& S, const Vec& x) { return !S.domain || S.domain->contains(x); }

// Midpoint test on a lattice around x̄: dom S must contain the midpoint of any two points it contains.
bool domain_convex_near(const SVMap& S, const Vec& xbar, double r) {
  const int n = static_cast<int>(xbar.size());
  const auto pts = neighborhood_grid(xbar, r, n == 1 ? 21 : n == 2 ? 5 : 3, 0, 0, S.domain);
  std::vector<Vec> in;
  for (const auto& p : pts)
    if (!eval(S, p).empty()) in.push_back(p);
  for (std::size_t i = 0; i < in.size(); ++i)
    for (std::size_t j = i + 1; j < in.size(); ++j) {
      const Vec mid = scale(add(in[i], in[j]), 0.5);
      if (in_domain(S, mid) && eval(S, mid).empty()) return false;
    }
  return true;
}

bool same_point(const GraphPoint& a, const GraphPoint& b) {
  return norm(sub(a.x, b.x)) <= kEps && norm(sub(a.y, b.y)) <= kEps;
}

}  // namespace

const char* probe_mode_name(ProbeMode m) { return m == ProbeMode::Standard ? "standard" : "exclude_base"; }

std::vector<GraphPoint> graph_net(const SVMap& S, const Vec& xbar, const Vec& ybar, double r, int per_point) {
  if (!(r > 0)) fail(Errc::HypothesisFailure, "net radius must be positive");
  std::vector<Vec> xs{xbar};
  for (double s : {r, r / 2})
    for (const auto& p : probe_points(xbar, s)) xs.push_back(p);
  // values move by about lip * r; the y window is wider so single-valued maps keep their points
  const Polyhedron win = window(ybar, 10.0 * r);
  std::vector<GraphPoint> net{{xbar, ybar}};
  for (const auto& x : xs) {
    if (!in_domain(S, x)) continue;
    auto ys = sample_points(intersect(eval(S, x), win), 4);
    std::stable_sort(ys.begin(), ys.end(),
                     [&](const Vec& a, const Vec& b) { return norm(sub(a, ybar)) < norm(sub(b, ybar)); });
    int taken = 0;
    for (const auto& y : ys) {
      if (taken == per_point) break;
      const GraphPoint g{x, y};
      bool dup = false;
      for (const auto& q : net) dup = dup || same_point(q, g);
      if (dup) continue;
      net.push_back(g);
      ++taken;
    }
  }
  return net;
}

StrictFromOuter strict_from_outer(const SVMap& S, const HomogMap& T, const Vec& xbar, const Vec& ybar,
                                  const CertConfig& cfg, std::vector<GraphPoint> net, ProbeMode mode) {
  cfg.validate();
  if (!on_graph(S, {xbar, ybar})) fail(Errc::NotOnGraph, "(x̄, ȳ) is not on the graph of S");
  StrictFromOuter out;
  out.mode = mode;
  HypothesisProbes& hp = out.probes;

  hp.outer_norm = outer_norm(T);
  if (!std::isfinite(hp.outer_norm)) hypothesis("|T|+ is infinite");
  std::optional<Vec> bad;
  hp.convex_values = convex_valued(T, 24, &bad);
  if (!hp.convex_values) hypothesis("T has a nonconvex value");
  hp.domain_convex = domain_convex_near(S, xbar, cfg.radius_ladder.front());
  if (!hp.domain_convex) hp.notes.push_back("domain failed the midpoint probe near x̄");

  if (net.empty()) net = graph_net(S, xbar, ybar, cfg.radius_ladder.front() / 2);
  if (mode == ProbeMode::ExcludeBase) {
    std::erase_if(net, [&](const GraphPoint& g) { return same_point(g, {xbar, ybar}); });
    const Ball trunc{ybar, cfg.truncation.radius};
    hp.outer_sc = semicontinuity_report(S, xbar, trunc).outer_holds;
    if (!hp.outer_sc) hypothesis("S is not outer semicontinuous at x̄");
  }
  if (net.empty()) fail(Errc::CoverageGap, "empty graph net");
  out.net = net;

  // inner semicontinuity relative to the V window around ȳ; x̄ stays probed in both modes
  const Ball vwin{ybar, cfg.w_ladder.back()};
  std::vector<Vec> seen;
  std::vector<GraphPoint> probe_at{{xbar, ybar}};
  probe_at.insert(probe_at.end(), net.begin(), net.end());
  for (const auto& g : probe_at) {
    bool dup = false;
    for (const auto& s : seen) dup = dup || norm(sub(s, g.x)) <= kEps;
    if (dup) continue;
    seen.push_back(g.x);
    if (!semicontinuity_report(S, g.x, vwin).inner_holds) {
      hp.inner_sc = false;
      hypothesis("liminf S(x') misses part of S(x) ∩ V near x̄");
    }
  }

  for (const auto& g : net) out.net_certs.push_back(certify_pseudo(S, target(T), g.x, g.y, Notion::pseudoOuterT, cfg));
  bool all_verified = true;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const Verdict v = out.net_certs[i].verdict;
    if (v == Verdict::refuted) {
      std::string at;
      for (double c : net[i].x) at += (at.empty() ? "" : ", ") + std::to_string(c);
      hypothesis("S is not pseudo outer (T+δ)-differentiable at net point x = (" + at + ")");
    }
    all_verified = all_verified && v == Verdict::verified_at_scale;
  }
  out.predicted = all_verified ? Verdict::verified_at_scale : Verdict::inconclusive;

  out.result = certify_pseudo(S, target(T), xbar, ybar, Notion::pseudoStrictT, cfg);
  out.measured = out.result.verdict;
  if (out.predicted == Verdict::verified_at_scale && out.measured != Verdict::verified_at_scale) {
    out.result.diagnostics = std::string("predicted verified_at_scale from the outer net, measured ") +
                             verdict_name(out.measured);
    out.result.verdict = Verdict::inconclusive;
  } else if (out.predicted != Verdict::verified_at_scale) {
    out.result.diagnostics = "some net certificate is inconclusive, so no prediction is made";
  }
  return out;
}

LipClmRecord lip_equals_limsup_clm(const SVMap& S, const Vec& xbar, const Vec& ybar, const CertConfig& cfg,
                                   double rel_tol, std::optional<double> net_radius) {
  cfg.validate();
  if (!on_graph(S, {xbar, ybar})) fail(Errc::NotOnGraph, "(x̄, ȳ) is not on the graph of S");
  LipClmRecord rec;
  rec.net_radius = net_radius ? *net_radius : cfg.radius_ladder.back();
  rec.lip_est = estimate_lip(S, xbar, ybar, cfg).value;

  auto net = graph_net(S, xbar, ybar, rec.net_radius);
  net.erase(net.begin());  // (x̄, ȳ) is excluded from the limsup
  if (net.empty()) fail(Errc::CoverageGap, "no graph points near (x̄, ȳ)");
  rec.net_size = net.size();
  std::vector<double> clm(net.size(), 0.0);
  parallel_for(static_cast<int>(net.size()), cfg.jobs,
               [&](int i) { clm[i] = estimate_clm(S, net[i].x, net[i].y, cfg).value; });
  rec.clm_sup_est = *std::max_element(clm.begin(), clm.end());

  const Ball vwin{ybar, cfg.w_ladder.back()};
  rec.inner_sc = semicontinuity_report(S, xbar, vwin).inner_holds;
  for (const auto& g : net) rec.inner_sc = rec.inner_sc && semicontinuity_report(S, g.x, vwin).inner_holds;

  const bool both_inf = std::isinf(rec.lip_est) && std::isinf(rec.clm_sup_est);
  rec.gap = both_inf ? 0.0 : rec.lip_est - rec.clm_sup_est;
  rec.tolerance = rel_tol * std::max(1.0, std::isfinite(rec.lip_est) ? rec.lip_est : 1.0);
  rec.one_sided = rec.gap >= -rec.tolerance;
  rec.equality = std::abs(rec.gap) <= rec.tolerance;
  return rec;
}

}  // namespace tdiff
