#include "tdiff/calculus.hpp"

#include <cmath>
#include <limits>

namespace tdiff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void hypothesis(const std::string& cond, const std::string& what) {
  fail(Errc::HypothesisFailure, cond + ": " + what);
}

bool is_zero_at_origin(const HomogMap& T) {
  const Region r = eval(T, Vec(T.dim_in, 0.0));
  if (r.empty()) return false;
  for (const auto& p : r.pieces) {
    if (!p.rays().empty()) return false;
    for (const auto& v : p.vertices())
      if (norm(v) > 1e-9) return false;
  }
  return true;
}

std::vector<Vec> unit_box_grid(int n) {
  const int k = n == 1 ? 21 : n == 2 ? 9 : 5;
  std::vector<Vec> out;
  std::vector<int> idx(n, 0);
  while (true) {
    Vec w(n);
    for (int i = 0; i < n; ++i) w[i] = -1.0 + 2.0 * idx[i] / (k - 1);
    out.push_back(w);
    int i = 0;
    while (i < n && ++idx[i] == k) idx[i++] = 0;
    if (i == n) break;
  }
  return out;
}

Region meet_regions(const Region& A, const Region& B) {
  Region out(A.dim);
  for (const auto& a : A.pieces)
    for (const auto& b : B.pieces) out.add(a.meet(b));
  return out;
}

// {(y_1..y_p) : y_i in S_i(x), sum y_i = y} in R^{p m}; polyhedral maps only.
Region decomposition_set(const std::vector<SVMap>& Ss, const Vec& x, const Vec& y) {
  const int p = static_cast<int>(Ss.size()), m = static_cast<int>(y.size()), d = p * m;
  check_dim(d);
  std::vector<Region> slices;
  for (const auto& S : Ss) slices.push_back(slice_at(S.graph, x));
  std::vector<Halfspace> total;
  for (int j = 0; j < m; ++j) {
    Vec a(d, 0.0);
    for (int i = 0; i < p; ++i) a[i * m + j] = 1.0;
    total.push_back({a, y[j]});
    total.push_back({scale(a, -1.0), -y[j]});
  }
  Region out(d);
  for (const auto& s : slices)
    if (s.empty()) return out;
  std::vector<size_t> idx(p, 0);
  while (true) {
    std::vector<Halfspace> hs = total;
    for (int i = 0; i < p; ++i) {
      std::vector<int> coords;
      for (int j = 0; j < m; ++j) coords.push_back(i * m + j);
      auto e = embed(slices[i].pieces[idx[i]], d, coords);
      hs.insert(hs.end(), e.begin(), e.end());
    }
    out.add(Polyhedron::from_h(d, hs));
    int i = 0;
    while (i < p && ++idx[i] == slices[i].pieces.size()) idx[i++] = 0;
    if (i == p) break;
  }
  return out;
}

void check_coverage(const Region& set, const std::vector<Vec>& net, double resolution, const std::string& cond) {
  for (const auto& P : set.pieces)
    if (!P.bounded()) hypothesis(cond, "the intermediate set is unbounded");
  for (const auto& q : sample_points(set, 8)) {
    double best = kInf;
    for (const auto& y : net) best = std::min(best, norm(sub(q, y)));
    if (best > resolution) fail(Errc::CoverageGap, "net misses an intermediate point by " + std::to_string(best));
  }
}

Box box_around(const Vec& c, double r) {
  Box b{c, c};
  for (auto& v : b.lo) v -= r;
  for (auto& v : b.hi) v += r;
  return b;
}

bool all_polyhedral(const std::vector<SVMap>& Ss) {
  for (const auto& S : Ss)
    if (S.backend != SVMap::Backend::PolyGraph) return false;
  return true;
}

void check_osc(const SVMap& aux, const Vec& at, const Vec& center, HypothesisReport& rep, const std::string& cond) {
  const SemicontinuityReport sc = semicontinuity_report(aux, at, Ball{center, 3.0});
  rep.osc_holds = sc.outer_holds;
  if (!sc.outer_holds) rep.warnings.push_back(cond + ": sampled outer semicontinuity check failed");
}

}  // namespace

double lip_at_zero(const HomogMap& T) {
  if (!is_zero_at_origin(T)) return kInf;
  if (T.kind != HomogMap::Kind::ConeGraph) return outer_norm(T);
  const std::vector<Vec> ws = unit_box_grid(T.dim_in);
  std::vector<Region> vals;
  for (const auto& w : ws) {
    vals.push_back(eval(T, w));
    // dom T is a closed cone; a gap in it breaks Lipschitz continuity across its boundary
    if (vals.back().empty()) return kInf;
  }
  double best = 0.0;
  for (size_t i = 0; i < ws.size(); ++i)
    for (size_t j = i + 1; j < ws.size(); ++j)
      best = std::max(best, hausdorff(vals[i], vals[j], std::nullopt) / norm(sub(ws[i], ws[j])));
  return best;
}

HypothesisReport check_chain(const ChainInstance& inst) {
  const SVMap &F = inst.F, &G = inst.G;
  if (F.dim_out != G.dim_in) fail(Errc::DimensionMismatch, "chain: F output differs from G input");
  if (inst.net.empty()) hypothesis("condition 3", "empty intermediate net");
  HypothesisReport rep;
  std::vector<Vec> ys;
  for (const auto& p : inst.net) {
    if (p.TF.dim_in != F.dim_in || p.TF.dim_out != F.dim_out || p.TG.dim_in != G.dim_in ||
        p.TG.dim_out != G.dim_out)
      fail(Errc::DimensionMismatch, "chain: attached map dimensions");
    if (!on_graph(F, {inst.xbar, p.y}) || !on_graph(G, {p.y, inst.zbar}))
      hypothesis("net", "a net point is not in G^{-1}(z̄) ∩ F(x̄)");
    rep.alpha = std::max(rep.alpha, outer_norm(p.TF));
    if (!is_zero_at_origin(p.TG)) hypothesis("condition 6", "T_{y->z̄}(0) != {0}");
    rep.beta = std::max(rep.beta, lip_at_zero(p.TG));
    ys.push_back(p.y);
  }
  if (!std::isfinite(rep.alpha)) hypothesis("condition 5", "outer norm of T_{x̄->y} is infinite");
  if (!std::isfinite(rep.beta)) hypothesis("condition 6", "lip T_{y->z̄}(0) is infinite");

  if (F.backend != SVMap::Backend::PolyGraph || G.backend != SVMap::Backend::PolyGraph) {
    rep.warnings.push_back("conditions 3 and 4 not checked: oracle backend");
    return rep;
  }
  const SVMap Ginv = invert(G);
  check_coverage(meet_regions(slice_at(F.graph, inst.xbar), slice_at(Ginv.graph, inst.zbar)), ys, inst.resolution,
                 "condition 3");
  const int n = F.dim_in;
  const Vec at = concat(inst.xbar, inst.zbar);
  if (at.size() + F.dim_out <= static_cast<size_t>(kMaxDim)) {
    Evaluator fn = [F, Ginv, n](const Vec& xz, double) {
      return meet_regions(slice_at(F.graph, slice(xz, 0, n)),
                          slice_at(Ginv.graph, slice(xz, n, static_cast<int>(xz.size()) - n)));
    };
    check_osc(SVMap::oracle("chain-aux", static_cast<int>(at.size()), F.dim_out, fn, box_around(at, 1.0), 0.0), at,
              ys.front(), rep, "condition 4");
  }
  return rep;
}

HomogMap chain_T(const ChainInstance& inst, HypothesisReport* report) {
  HypothesisReport rep = check_chain(inst);
  if (report) *report = rep;
  if (inst.net.size() == 1) return compose(inst.net[0].TG, inst.net[0].TF);
  std::vector<HomogMap> parts;
  for (const auto& p : inst.net) parts.push_back(compose(p.TG, p.TF));
  return unite(parts);
}

HomogMap chain_single(const Fn& f, const Vec& xbar, const HomogMap& Tf, const SVMap& G, const HomogMap& TG,
                      const Vec& zbar) {
  const Vec ybar = f(xbar);
  if (static_cast<int>(ybar.size()) != G.dim_in || Tf.dim_out != G.dim_in || TG.dim_in != G.dim_in)
    fail(Errc::DimensionMismatch, "chain_single: dimensions");
  if (!on_graph(G, {ybar, zbar})) hypothesis("base point", "z̄ is not in G(f(x̄))");
  if (!std::isfinite(outer_norm(Tf))) hypothesis("condition 3", "outer norm of T_{x̄->ȳ} is infinite");
  if (!is_zero_at_origin(TG)) hypothesis("condition 4", "T_{ȳ->z̄}(0) != {0}");
  if (!std::isfinite(lip_at_zero(TG))) hypothesis("condition 4", "lip T_{ȳ->z̄}(0) is infinite");
  return compose(TG, Tf);
}

HomogMap sum_T(const std::vector<SVMap>& Ss, const Vec& xbar, const Vec& ybar, const std::vector<SumNetPoint>& net,
               double resolution, HypothesisReport* report) {
  if (Ss.empty()) fail(Errc::EmptyRegion, "sum of no maps");
  if (net.empty()) hypothesis("condition 2", "empty decomposition net");
  const int p = static_cast<int>(Ss.size()), m = static_cast<int>(ybar.size());
  HypothesisReport rep;
  std::vector<Vec> pts;
  for (const auto& q : net) {
    if (static_cast<int>(q.ys.size()) != p || static_cast<int>(q.Ts.size()) != p)
      fail(Errc::DimensionMismatch, "sum_T: net point needs one y and one T per map");
    Vec total(m, 0.0), flat;
    for (int i = 0; i < p; ++i) {
      if (!on_graph(Ss[i], {xbar, q.ys[i]})) hypothesis("condition 1", "y_i is not in S_i(x̄)");
      total = add(total, q.ys[i]);
      flat = concat(flat, q.ys[i]);
      rep.alpha = std::max(rep.alpha, outer_norm(q.Ts[i]));
    }
    if (norm(sub(total, ybar)) > 1e-7) hypothesis("condition 1", "net point does not sum to ȳ");
    pts.push_back(flat);
  }
  if (!std::isfinite(rep.alpha)) hypothesis("condition 4", "outer norm of some T^i is infinite");

  if (!all_polyhedral(Ss) || p * m > kMaxDim) {
    rep.warnings.push_back("conditions 2 and 3 not checked: oracle backend or dimension");
  } else {
    check_coverage(decomposition_set(Ss, xbar, ybar), pts, resolution, "condition 2");
    const int n = static_cast<int>(xbar.size());
    const Vec at = concat(xbar, ybar);
    if (static_cast<int>(at.size()) + p * m <= kMaxDim) {
      Evaluator fn = [Ss, n](const Vec& xy, double) {
        return decomposition_set(Ss, slice(xy, 0, n), slice(xy, n, static_cast<int>(xy.size()) - n));
      };
      check_osc(SVMap::oracle("sum-aux", static_cast<int>(at.size()), p * m, fn, box_around(at, 1.0), 0.0), at,
                pts.front(), rep, "condition 3");
    }
  }
  if (report) *report = rep;
  if (net.size() == 1) return sum(net[0].Ts);
  std::vector<HomogMap> parts;
  for (const auto& q : net) parts.push_back(sum(q.Ts));
  return unite(parts);
}

}  // namespace tdiff
