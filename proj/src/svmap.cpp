#include "tdiff/svmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tdiff/homog.hpp"

namespace tdiff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> iota_from(int from, int count) {
  std::vector<int> v(count);
  std::iota(v.begin(), v.end(), from);
  return v;
}

}  // namespace

bool Box::contains(const Vec& x, double tol) const {
  if (x.size() != lo.size()) return false;
  for (size_t i = 0; i < x.size(); ++i)
    if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
  return true;
}

SVMap SVMap::poly_graph(int n, int m, Region graph, std::optional<Box> domain) {
  if (graph.dim != n + m) fail(Errc::DimensionMismatch, "graph dimension must be n + m");
  SVMap S;
  S.dim_in = n;
  S.dim_out = m;
  S.backend = Backend::PolyGraph;
  S.graph = std::move(graph);
  S.domain = std::move(domain);
  return S;
}

SVMap SVMap::oracle(std::string name, int n, int m, Evaluator fn, Box domain, double h) {
  if (static_cast<int>(domain.lo.size()) != n || static_cast<int>(domain.hi.size()) != n)
    fail(Errc::DimensionMismatch, "oracle domain box dimension");
  SVMap S;
  S.dim_in = n;
  S.dim_out = m;
  S.backend = Backend::Oracle;
  S.fn = std::move(fn);
  S.domain = std::move(domain);
  S.resolution = h;
  S.name = std::move(name);
  return S;
}

Region eval(const SVMap& S, const Vec& x) {
  if (static_cast<int>(x.size()) != S.dim_in) fail(Errc::DimensionMismatch, "eval: x has wrong dimension");
  if (S.domain && !S.domain->contains(x)) fail(Errc::OutsideDomain, "x outside the declared domain");
  if (S.backend == SVMap::Backend::Oracle) {
    Region r = S.fn(x, S.resolution);
    if (r.dim != S.dim_out) fail(Errc::EvaluationFailure, "oracle returned a region of the wrong dimension");
    return r;
  }
  return slice_at(S.graph, x);
}

SVMap invert(const SVMap& S) {
  if (S.backend != SVMap::Backend::PolyGraph) fail(Errc::OracleNotInvertible, "oracle maps cannot be inverted");
  std::vector<int> perm = iota_from(S.dim_in, S.dim_out);
  for (int i = 0; i < S.dim_in; ++i) perm.push_back(i);
  Region g(S.graph.dim);
  for (const auto& p : S.graph.pieces) g.add(p.permute(perm));
  return SVMap::poly_graph(S.dim_out, S.dim_in, g);
}

SVMap compose_graphs(const SVMap& G, const SVMap& F) {
  if (F.backend != SVMap::Backend::PolyGraph || G.backend != SVMap::Backend::PolyGraph)
    fail(Errc::OracleNotInvertible, "graph composition needs polyhedral graphs");
  if (F.dim_out != G.dim_in) fail(Errc::DimensionMismatch, "compose_graphs: F output != G input");
  const int n = F.dim_in, m = F.dim_out, p = G.dim_out, d = n + m + p;
  check_dim(d);
  Region out(n + p);
  for (const auto& a : F.graph.pieces)
    for (const auto& b : G.graph.pieces) {
      auto hs = embed(a, d, iota_from(0, n + m));
      auto hb = embed(b, d, iota_from(n, m + p));
      hs.insert(hs.end(), hb.begin(), hb.end());
      const Polyhedron lifted = Polyhedron::from_h(d, hs);
      if (lifted.empty()) continue;
      auto drop = [&](const Vec& v) { return concat(slice(v, 0, n), slice(v, n + m, p)); };
      std::vector<Vec> vs, rs;
      for (const auto& v : lifted.vertices()) vs.push_back(drop(v));
      for (const auto& r : lifted.rays()) rs.push_back(drop(r));
      out.add(Polyhedron::from_v(n + p, vs, rs));
    }
  return SVMap::poly_graph(n, p, out);
}

SVMap sum_graphs(const std::vector<SVMap>& Ss) {
  if (Ss.empty()) fail(Errc::EmptyRegion, "sum of no maps");
  SVMap acc = Ss[0];
  for (size_t i = 1; i < Ss.size(); ++i) {
    const SVMap& S = Ss[i];
    if (S.backend != SVMap::Backend::PolyGraph || acc.backend != SVMap::Backend::PolyGraph)
      fail(Errc::OracleNotInvertible, "graph sums need polyhedral graphs");
    if (S.dim_in != acc.dim_in || S.dim_out != acc.dim_out) fail(Errc::DimensionMismatch, "sum_graphs dimensions");
    const int n = S.dim_in, m = S.dim_out, d = n + 2 * m;
    check_dim(d);
    std::vector<int> c2 = iota_from(0, n);
    for (int j = 0; j < m; ++j) c2.push_back(n + m + j);
    Region out(n + m);
    for (const auto& a : acc.graph.pieces)
      for (const auto& b : S.graph.pieces) {
        auto hs = embed(a, d, iota_from(0, n + m));
        auto hb = embed(b, d, c2);
        hs.insert(hs.end(), hb.begin(), hb.end());
        const Polyhedron lifted = Polyhedron::from_h(d, hs);
        if (lifted.empty()) continue;
        auto fold = [&](const Vec& v) {
          Vec g = slice(v, 0, n + m);
          for (int j = 0; j < m; ++j) g[n + j] += v[n + m + j];
          return g;
        };
        std::vector<Vec> vs, rs;
        for (const auto& v : lifted.vertices()) vs.push_back(fold(v));
        for (const auto& r : lifted.rays()) rs.push_back(fold(r));
        out.add(Polyhedron::from_v(n + m, vs, rs));
      }
    acc = SVMap::poly_graph(n, m, out);
  }
  return acc;
}

bool on_graph(const SVMap& S, const GraphPoint& p, double tol) {
  if (S.domain && !S.domain->contains(p.x)) return false;
  const Region r = eval(S, p.x);
  return !r.empty() && dist_point_region(p.y, r) <= tol + S.resolution;
}

std::vector<Vec> probe_points(const Vec& xbar, double r) {
  const int n = static_cast<int>(xbar.size());
  std::vector<Vec> out;
  for (const auto& d : unit_directions(n, n == 1 ? 2 : 4 * n))
    out.push_back(add(xbar, scale(d, r)));
  return out;
}

namespace {

constexpr int kProbeDensity = 64;

double tol_for(const Vec& y, double r) { return 10.0 * r * (1.0 + norm(y)); }

struct Probe {
  Vec x;
  Region value;
  double radius;
};

std::vector<Probe> run_probes(const SVMap& S, const Vec& xbar, const std::vector<double>& radii) {
  std::vector<Probe> out;
  for (double r : radii)
    for (const auto& x : probe_points(xbar, r)) {
      if (S.domain && !S.domain->contains(x)) continue;
      Region v = eval(S, x);
      if (!v.empty()) out.push_back({x, std::move(v), r});
    }
  return out;
}

}  // namespace

LimitProbe limit_probe(const SVMap& S, const Vec& xbar, const std::vector<double>& radii, const Ball& truncation) {
  if (S.domain && !S.domain->contains(xbar)) fail(Errc::OutsideDomain, "limit_probe at a point outside the domain");
  if (radii.empty()) fail(Errc::InsufficientSamples, "empty radius ladder");
  const auto probes = run_probes(S, xbar, radii);
  const double rmin = radii.back();
  std::vector<Vec> cands;
  // candidates come from the finest rung and from S(x̄) itself
  for (const auto& p : probes) {
    if (p.radius != rmin) continue;
    auto s = sample_points(truncate(p.value, truncation), kProbeDensity);
    cands.insert(cands.end(), s.begin(), s.end());
  }
  const Region at = eval(S, xbar);
  if (!at.empty()) {
    auto s = sample_points(truncate(at, truncation), kProbeDensity);
    cands.insert(cands.end(), s.begin(), s.end());
  }
  LimitProbe lp;
  lp.outer_est = Region(S.dim_out);
  lp.inner_est = Region(S.dim_out);
  lp.radii = radii;
  for (const auto& y : cands) {
    double mn = kInf, mx = 0.0;
    bool any = false;
    for (const auto& p : probes) {
      if (p.radius != rmin) continue;
      const double d = dist_point_region(y, p.value);
      mn = std::min(mn, d);
      mx = std::max(mx, d);
      any = true;
    }
    if (!any) continue;
    if (mn <= tol_for(y, rmin)) lp.outer_est.add(Polyhedron::point(y));
    if (mx <= tol_for(y, rmin)) lp.inner_est.add(Polyhedron::point(y));
  }
  return lp;
}

SemicontinuityReport semicontinuity_report(const SVMap& S, const Vec& xbar, const Ball& truncation,
                                           const std::vector<double>& radii) {
  const LimitProbe lp = limit_probe(S, xbar, radii, truncation);
  const Region at = eval(S, xbar);
  SemicontinuityReport rep;
  rep.radii = radii;
  const double rmin = radii.back();
  double worst = 0.0;
  for (const auto& p : lp.outer_est.pieces) {
    const Vec& y = p.vertices()[0];
    const double d = at.empty() ? kInf : dist_point_region(y, at);
    if (d > tol_for(y, rmin) && d > worst) {
      worst = d;
      rep.outer_holds = false;
      rep.outer_witness = y;
    }
  }
  if (!at.empty()) {
    const auto probes = run_probes(S, xbar, radii);
    worst = 0.0;
    for (const auto& y : sample_points(truncate(at, truncation), kProbeDensity)) {
      for (const auto& p : probes) {
        if (p.radius != rmin) continue;
        const double d = dist_point_region(y, p.value);
        // ties go to the lexicographically larger point
        const bool better = d > worst + 1e-12 || (std::abs(d - worst) <= 1e-12 && rep.inner_witness && y > *rep.inner_witness);
        if (d > tol_for(y, rmin) && better) {
          worst = d;
          rep.inner_holds = false;
          rep.inner_witness = y;
          rep.inner_witness_x = p.x;
        }
      }
    }
  }
  return rep;
}

}  // namespace tdiff

namespace tdiff {

SVMap from_function(std::string name, int n, int m, Fn f, Box domain) {
  auto fn = [f = std::move(f), m](const Vec& x, double) {
    Vec y = f(x);
    if (static_cast<int>(y.size()) != m) fail(Errc::EvaluationFailure, "function returned wrong dimension");
    for (double v : y)
      if (!std::isfinite(v)) fail(Errc::EvaluationFailure, "function value not finite");
    return Region::of(Polyhedron::point(y));
  };
  return SVMap::oracle(std::move(name), n, m, fn, std::move(domain), 0.0);
}

}  // namespace tdiff
