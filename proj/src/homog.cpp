#include "tdiff/homog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace tdiff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec mat_vec(const Matrix& A, const Vec& w) {
  Vec y(A.rows(), 0.0);
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) y[i] += A(i, j) * w[j];
  return y;
}

void check_cone_piece(const Polyhedron& P) {
  for (const auto& h : P.hrep())
    if (std::abs(h.offset) > 1e-7)
      fail(Errc::HypothesisFailure, "cone-graph piece has a halfspace not through the origin");
}

Polyhedron cone_from_rays(int dim, const std::vector<Vec>& rays) {
  return Polyhedron::from_v(dim, {Vec(dim, 0.0)}, rays);
}

// Unit y-polytope normals: |y|_P <= t iff <u, y> <= t for all u.
std::vector<Vec> y_normals(int m) {
  std::vector<Vec> us;
  const Polyhedron b = ball_outer(Vec(m, 0.0), 1.0);
  for (const auto& h : b.hrep()) us.push_back(h.normal);
  return us;
}

Region ball_graph(int n, int m, double kappa) {
  const int d = n + m;
  check_dim(d);
  const auto us = y_normals(m);
  Region g(d);
  if (n == 1) {
    for (double s : {1.0, -1.0}) {
      std::vector<Halfspace> hs;
      Vec a(d, 0.0);
      a[0] = -s;
      hs.push_back({a, 0.0});
      for (const auto& u : us) {
        Vec b(d, 0.0);
        b[0] = -s * kappa;
        for (int j = 0; j < m; ++j) b[1 + j] = u[j];
        hs.push_back({b, 0.0});
      }
      g.add(Polyhedron::from_h(d, hs));
    }
    return g;
  }
  // Gauge of the inscribed w-polytope bounds |w| from above: outer approximation.
  const Polyhedron q = ball_inner(Vec(n, 0.0), 1.0);
  const auto& fs = q.hrep();
  for (size_t f = 0; f < fs.size(); ++f) {
    std::vector<Halfspace> hs;
    const Vec lf = scale(fs[f].normal, 1.0 / fs[f].offset);
    for (size_t g2 = 0; g2 < fs.size(); ++g2) {
      if (g2 == f) continue;
      const Vec lg = scale(fs[g2].normal, 1.0 / fs[g2].offset);
      Vec a(d, 0.0);
      for (int j = 0; j < n; ++j) a[j] = lg[j] - lf[j];
      hs.push_back({a, 0.0});
    }
    for (const auto& u : us) {
      Vec b(d, 0.0);
      for (int j = 0; j < n; ++j) b[j] = -kappa * lf[j];
      for (int j = 0; j < m; ++j) b[n + j] = u[j];
      hs.push_back({b, 0.0});
    }
    g.add(Polyhedron::from_h(d, hs));
  }
  return g;
}

Region bundle_graph(const std::vector<Matrix>& mats) {
  const int m = static_cast<int>(mats[0].rows());
  const int n = static_cast<int>(mats[0].cols());
  const int d = n + m;
  check_dim(d);
  Region g(d);
  auto gen = [&](const Vec& w, const Matrix& A) { return concat(w, mat_vec(A, w)); };
  if (mats.size() == 1) {
    std::vector<Vec> rays;
    for (int j = 0; j < n; ++j) {
      Vec e(n, 0.0);
      e[j] = 1.0;
      rays.push_back(gen(e, mats[0]));
      rays.push_back(scale(gen(e, mats[0]), -1.0));
    }
    g.add(cone_from_rays(d, rays));
    return g;
  }
  // Orthant fan; exact for n = 1, an outer approximation otherwise.
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::vector<Vec> rays;
    for (int j = 0; j < n; ++j) {
      Vec e(n, 0.0);
      e[j] = (mask >> j & 1) ? -1.0 : 1.0;
      for (const auto& A : mats) rays.push_back(gen(e, A));
    }
    g.add(cone_from_rays(d, rays));
  }
  return g;
}

Region negate_region(const Region& R) {
  Region out(R.dim);
  for (const auto& p : R.pieces) out.add(p.negate());
  return out;
}

void check_budget(std::size_t n) {
  if (n > kMaxPieces)
    fail(Errc::ComplexityBudgetExceeded, "cone-graph piece count " + std::to_string(n) + " exceeds 10000");
}

std::vector<int> iota_from(int from, int count) {
  std::vector<int> v(count);
  std::iota(v.begin(), v.end(), from);
  return v;
}

}  // namespace

HomogMap HomogMap::cone(int n, int m, Region graph) {
  if (graph.dim != n + m) fail(Errc::DimensionMismatch, "cone graph dimension must be n + m");
  for (const auto& p : graph.pieces) check_cone_piece(p);
  HomogMap T;
  T.dim_in = n;
  T.dim_out = m;
  T.kind = Kind::ConeGraph;
  T.graph = std::move(graph);
  return T;
}

HomogMap HomogMap::bundle(std::vector<Matrix> mats) {
  if (mats.empty()) fail(Errc::EmptyRegion, "matrix bundle needs at least one matrix");
  for (const auto& A : mats)
    if (A.rows() != mats[0].rows() || A.cols() != mats[0].cols())
      fail(Errc::DimensionMismatch, "bundle matrices differ in shape");
  HomogMap T;
  T.dim_in = static_cast<int>(mats[0].cols());
  T.dim_out = static_cast<int>(mats[0].rows());
  T.kind = Kind::MatrixBundle;
  T.mats = std::move(mats);
  return T;
}

HomogMap HomogMap::ball(int n, int m, double kappa) {
  if (kappa < 0) fail(Errc::HypothesisFailure, "ball map needs kappa >= 0");
  HomogMap T;
  T.dim_in = n;
  T.dim_out = m;
  T.kind = Kind::BallMap;
  T.kappa = kappa;
  return T;
}

double Inflation::total() const { return std::accumulate(deltas.begin(), deltas.end(), 0.0); }

Inflation inflate(const HomogMap& T, double delta) { return Inflation{T, {delta}}; }

Inflation inflate(const Inflation& I, double delta) {
  Inflation J = I;
  J.deltas.push_back(delta);
  return J;
}

Region eval(const HomogMap& T, const Vec& w) {
  if (static_cast<int>(w.size()) != T.dim_in) fail(Errc::DimensionMismatch, "eval: w has wrong dimension");
  switch (T.kind) {
    case HomogMap::Kind::ConeGraph:
      return slice_at(T.graph, w);
    case HomogMap::Kind::MatrixBundle: {
      std::vector<Vec> pts;
      for (const auto& A : T.mats) pts.push_back(mat_vec(A, w));
      return Region::of(Polyhedron::from_v(T.dim_out, pts));
    }
    case HomogMap::Kind::BallMap:
      return Region::of(ball_outer(Vec(T.dim_out, 0.0), T.kappa * norm(w)));
  }
  return Region(T.dim_out);
}

Region eval(const Inflation& I, const Vec& w) {
  Region R = eval(I.base, w);
  const double nw = norm(w);
  for (double d : I.deltas) R = minkowski_sum(R, Region::of(ball_outer(Vec(I.base.dim_out, 0.0), d * nw)));
  return R;
}

double dist_to_shift(const Vec& y, const Region& A, const HomogMap& T, const Vec& w) {
  if (A.empty()) return kInf;
  if (T.kind == HomogMap::Kind::BallMap) return std::max(0.0, dist_point_region(y, A) - T.kappa * norm(w));
  if (T.kind == HomogMap::Kind::MatrixBundle && T.mats.size() == 1)
    return dist_point_region(sub(y, mat_vec(T.mats[0], w)), A);
  const Region t = eval(T, w);
  if (t.empty()) return kInf;
  return dist_point_region(y, minkowski_sum(A, t));
}

double dist_to_unshift(const Vec& y, const Region& A, const HomogMap& T, const Vec& w) {
  if (A.empty()) return kInf;
  if (T.kind == HomogMap::Kind::BallMap) return std::max(0.0, dist_point_region(y, A) - T.kappa * norm(w));
  if (T.kind == HomogMap::Kind::MatrixBundle && T.mats.size() == 1)
    return dist_point_region(add(y, mat_vec(T.mats[0], w)), A);
  const Region t = eval(T, w);
  if (t.empty()) return kInf;
  return dist_point_region(y, minkowski_sum(A, negate_region(t)));
}

double outer_norm(const HomogMap& T) {
  switch (T.kind) {
    case HomogMap::Kind::BallMap:
      return T.kappa;
    case HomogMap::Kind::MatrixBundle: {
      double best = 0.0;
      for (const auto& A : T.mats) {
        Eigen::JacobiSVD<Matrix> svd(A);
        if (svd.singularValues().size() > 0) best = std::max(best, svd.singularValues()(0));
      }
      return best;
    }
    case HomogMap::Kind::ConeGraph:
      break;
  }
  const int n = T.dim_in, m = T.dim_out, d = n + m;
  const Region at0 = slice_at(T.graph, Vec(n, 0.0));
  for (const auto& p : at0.pieces) {
    if (!p.rays().empty()) return kInf;
    for (const auto& v : p.vertices())
      if (norm(v) > 1e-9) return kInf;
  }
  // |w| <= 1 replaced by the circumscribed polytope for n >= 2: an upper bound within ball_outer_factor.
  const Polyhedron wball = ball_outer(Vec(n, 0.0), 1.0);
  const auto cap = embed(wball, d, iota_from(0, n));
  double best = 0.0;
  for (const auto& p : T.graph.pieces) {
    const Polyhedron q = p.meet(cap);
    for (const auto& v : q.vertices()) best = std::max(best, norm(slice(v, n, m)));
  }
  return best;
}

HomogMap reflect(const HomogMap& T) {
  if (T.kind != HomogMap::Kind::ConeGraph) return T;
  return HomogMap::cone(T.dim_in, T.dim_out, negate_region(T.graph));
}

HomogMap to_cone(const HomogMap& T) {
  switch (T.kind) {
    case HomogMap::Kind::ConeGraph:
      return T;
    case HomogMap::Kind::MatrixBundle:
      return HomogMap::cone(T.dim_in, T.dim_out, bundle_graph(T.mats));
    case HomogMap::Kind::BallMap:
      return HomogMap::cone(T.dim_in, T.dim_out, ball_graph(T.dim_in, T.dim_out, T.kappa));
  }
  return T;
}

HomogMap compose(const HomogMap& T2, const HomogMap& T1) {
  if (T1.dim_out != T2.dim_in) fail(Errc::DimensionMismatch, "compose: inner output != outer input");
  using K = HomogMap::Kind;
  if (T1.kind == K::MatrixBundle && T2.kind == K::MatrixBundle) {
    std::vector<Matrix> prods;
    for (const auto& B : T2.mats)
      for (const auto& A : T1.mats) prods.push_back(B * A);
    return HomogMap::bundle(prods);
  }
  if (T1.kind == K::BallMap && T2.kind == K::BallMap) return HomogMap::ball(T1.dim_in, T2.dim_out, T1.kappa * T2.kappa);
  const HomogMap C1 = to_cone(T1), C2 = to_cone(T2);
  const int n = T1.dim_in, m = T1.dim_out, p = T2.dim_out, d = n + m + p;
  check_dim(d);
  check_budget(C1.graph.pieces.size() * C2.graph.pieces.size());
  Region out(n + p);
  const auto c1 = iota_from(0, n + m), c2 = iota_from(n, m + p);
  for (const auto& g1 : C1.graph.pieces)
    for (const auto& g2 : C2.graph.pieces) {
      auto hs = embed(g1, d, c1);
      auto h2 = embed(g2, d, c2);
      hs.insert(hs.end(), h2.begin(), h2.end());
      const Polyhedron lifted = Polyhedron::from_h(d, hs);
      if (lifted.empty() || lifted.rays().empty()) continue;
      std::vector<Vec> rays;
      for (const auto& r : lifted.rays()) rays.push_back(concat(slice(r, 0, n), slice(r, n + m, p)));
      out.add(cone_from_rays(n + p, rays));
    }
  if (out.empty()) out.add(Polyhedron::point(Vec(n + p, 0.0)));
  return HomogMap::cone(n, p, out);
}

HomogMap sum(const std::vector<HomogMap>& Ts) {
  if (Ts.empty()) fail(Errc::EmptyRegion, "sum of no maps");
  using K = HomogMap::Kind;
  HomogMap acc = Ts[0];
  for (size_t i = 1; i < Ts.size(); ++i) {
    const HomogMap& T = Ts[i];
    if (T.dim_in != acc.dim_in || T.dim_out != acc.dim_out) fail(Errc::DimensionMismatch, "sum: dimensions differ");
    if (acc.kind == K::MatrixBundle && T.kind == K::MatrixBundle) {
      std::vector<Matrix> s;
      for (const auto& A : acc.mats)
        for (const auto& B : T.mats) s.push_back(A + B);
      acc = HomogMap::bundle(s);
      continue;
    }
    if (acc.kind == K::BallMap && T.kind == K::BallMap) {
      acc = HomogMap::ball(acc.dim_in, acc.dim_out, acc.kappa + T.kappa);
      continue;
    }
    const HomogMap C1 = to_cone(acc), C2 = to_cone(T);
    const int n = acc.dim_in, m = acc.dim_out, d = n + 2 * m;
    check_dim(d);
    check_budget(C1.graph.pieces.size() * C2.graph.pieces.size());
    std::vector<int> c1 = iota_from(0, n + m), c2 = iota_from(0, n);
    for (int j = 0; j < m; ++j) c2.push_back(n + m + j);
    Region out(n + m);
    for (const auto& g1 : C1.graph.pieces)
      for (const auto& g2 : C2.graph.pieces) {
        auto hs = embed(g1, d, c1);
        auto h2 = embed(g2, d, c2);
        hs.insert(hs.end(), h2.begin(), h2.end());
        const Polyhedron lifted = Polyhedron::from_h(d, hs);
        if (lifted.empty() || lifted.rays().empty()) continue;
        std::vector<Vec> rays;
        for (const auto& r : lifted.rays()) {
          Vec g = slice(r, 0, n + m);
          for (int j = 0; j < m; ++j) g[n + j] += r[n + m + j];
          rays.push_back(g);
        }
        out.add(cone_from_rays(n + m, rays));
      }
    if (out.empty()) out.add(Polyhedron::point(Vec(n + m, 0.0)));
    acc = HomogMap::cone(n, m, out);
  }
  return acc;
}

HomogMap unite(const std::vector<HomogMap>& Ts) {
  if (Ts.empty()) fail(Errc::EmptyRegion, "union of no maps");
  Region g(Ts[0].dim_in + Ts[0].dim_out);
  for (const auto& T : Ts) {
    if (T.dim_in != Ts[0].dim_in || T.dim_out != Ts[0].dim_out) fail(Errc::DimensionMismatch, "union: dimensions differ");
    for (const auto& p : to_cone(T).graph.pieces) g.add(p);
  }
  check_budget(g.pieces.size());
  return HomogMap::cone(Ts[0].dim_in, Ts[0].dim_out, g);
}

HomogMap meet(const HomogMap& T1, const HomogMap& T2) {
  if (T1.dim_in != T2.dim_in || T1.dim_out != T2.dim_out) fail(Errc::DimensionMismatch, "meet: dimensions differ");
  const HomogMap C1 = to_cone(T1), C2 = to_cone(T2);
  check_budget(C1.graph.pieces.size() * C2.graph.pieces.size());
  Region g(T1.dim_in + T1.dim_out);
  for (const auto& a : C1.graph.pieces)
    for (const auto& b : C2.graph.pieces) g.add(a.meet(b));
  return HomogMap::cone(T1.dim_in, T1.dim_out, g);
}

HomogMap scale_input(const HomogMap& T, double k) {
  switch (T.kind) {
    case HomogMap::Kind::BallMap:
      return HomogMap::ball(T.dim_in, T.dim_out, T.kappa * std::abs(k));
    case HomogMap::Kind::MatrixBundle: {
      std::vector<Matrix> ms;
      for (const auto& A : T.mats) ms.push_back(A * k);
      return HomogMap::bundle(ms);
    }
    case HomogMap::Kind::ConeGraph:
      break;
  }
  // (w, y) in gph T(k.) iff (k w, y) in gph T.
  Region g(T.graph.dim);
  for (const auto& p : T.graph.pieces) {
    std::vector<Vec> rays;
    for (const auto& r : p.rays()) {
      Vec s = r;
      for (int j = 0; j < T.dim_in; ++j) s[j] /= k;
      rays.push_back(s);
    }
    g.add(cone_from_rays(g.dim, rays));
  }
  return HomogMap::cone(T.dim_in, T.dim_out, g);
}

std::vector<Vec> unit_directions(int dim, int count, unsigned long long seed) {
  std::vector<Vec> ds;
  for (int i = 0; i < dim; ++i)
    for (double s : {1.0, -1.0}) {
      Vec e(dim, 0.0);
      e[i] = s;
      ds.push_back(e);
    }
  if (dim == 1) return ds;
  if (dim == 2) {
    const int extra = std::max(0, count - 4);
    for (int k = 0; k < extra; ++k) {
      const double a = 2.0 * M_PI * (k + 0.5) / extra;
      ds.push_back({std::cos(a), std::sin(a)});
    }
    return ds;
  }
  std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> g;
  while (static_cast<int>(ds.size()) < count) {
    Vec v(dim);
    for (double& x : v) x = g(rng);
    ds.push_back(scale(v, 1.0 / norm(v)));
  }
  return ds;
}

namespace {

bool region_subset(const Region& small, const Region& big, double tol) {
  if (small.empty()) return true;
  if (big.empty()) return false;
  for (const auto& p : small.pieces) {
    for (const auto& v : p.vertices()) {
      if (dist_point_region(v, big) > tol) return false;
      for (const auto& r : p.rays()) {
        const Vec far = add(v, scale(r, 1e3 * (1.0 + norm(v))));
        if (dist_point_region(far, big) > tol * 1e3) return false;
      }
    }
    if (p.bounded() && big.pieces.size() > 1)
      for (const auto& s : sample_points(p, 4))
        if (dist_point_region(s, big) > tol) return false;
  }
  return true;
}

}  // namespace

ContainsResult contains(const HomogMap& big, const HomogMap& small, int n_dirs) {
  if (big.dim_in != small.dim_in || big.dim_out != small.dim_out) fail(Errc::DimensionMismatch, "contains: dimensions");
  ContainsResult res;
  for (const auto& w : unit_directions(small.dim_in, n_dirs)) {
    if (!region_subset(eval(small, w), eval(big, w), 1e-7)) {
      res.holds = false;
      res.witness = w;
      return res;
    }
  }
  return res;
}

bool convex_valued(const HomogMap& T, int n_dirs, std::optional<Vec>* witness) {
  if (T.kind != HomogMap::Kind::ConeGraph) return true;
  for (const auto& w : unit_directions(T.dim_in, n_dirs)) {
    Region R = eval(T, w);
    if (R.pieces.size() <= 1) continue;
    const double on = outer_norm(T);
    R = truncate(R, Ball{Vec(T.dim_out, 0.0), 10.0 * (1.0 + (std::isfinite(on) ? on : 1.0))});
    const auto pts = sample_points(R, 2);
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t j = i + 1; j < pts.size(); ++j) {
        const Vec mid = scale(add(pts[i], pts[j]), 0.5);
        if (dist_point_region(mid, R) > 1e-7) {
          if (witness) *witness = w;
          return false;
        }
      }
  }
  return true;
}

}  // namespace tdiff
