#include "tdiff/coderiv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "linalg.hpp"

namespace tdiff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStrict = 1e-10;

// Local cone of one piece at x̄: indices into the shared hyperplane list with orientation.
struct LocalCone {
  std::vector<int> plane;
  std::vector<int> sigma;  // normal = sigma * planes[plane]
};

Polyhedron zero_cone(int d) { return Polyhedron::point(Vec(d, 0.0)); }

Polyhedron cone_of(int d, const std::vector<Vec>& gens) {
  if (gens.empty()) return zero_cone(d);
  return Polyhedron::from_v(d, {Vec(d, 0.0)}, gens);
}

bool cone_subset(const Polyhedron& A, const Polyhedron& B) {
  for (const auto& r : A.rays())
    if (!B.contains(r, 1e-8)) return false;
  return true;
}

Vec centroid(const Polyhedron& P) {
  Vec c(P.dim(), 0.0);
  for (const auto& v : P.vertices()) c = add(c, v);
  return scale(c, 1.0 / static_cast<double>(P.vertices().size()));
}

class Arrangement {
 public:
  Arrangement(int d, std::vector<Vec> planes, std::vector<LocalCone> cones)
      : d_(d), planes_(std::move(planes)), cones_(std::move(cones)) {}

  // Each nonempty cell of the arrangement inside some local cone, with its regular normal cone.
  std::vector<Polyhedron> cell_cones() {
    std::vector<int> signs;
    std::vector<Polyhedron> out;
    dfs(signs, out);
    return out;
  }

  Polyhedron regular_at(const std::vector<int>& signs) const {
    std::optional<Polyhedron> acc;
    for (const auto& K : cones_) {
      bool inside = true;
      std::vector<Vec> active;
      for (size_t c = 0; c < K.plane.size(); ++c) {
        const int s = K.sigma[c] * signs[K.plane[c]];
        if (s > 0) inside = false;
        if (s == 0) active.push_back(scale(planes_[K.plane[c]], K.sigma[c]));
      }
      if (!inside) continue;
      Polyhedron N = cone_of(d_, active);
      acc = acc ? acc->meet(N) : N;
    }
    return acc ? *acc : Polyhedron::empty_set(d_);
  }

 private:
  bool open_cell_nonempty(const std::vector<int>& signs) const {
    std::vector<Halfspace> hs;
    for (size_t k = 0; k < signs.size(); ++k) {
      const Vec& a = planes_[k];
      if (signs[k] <= 0) hs.push_back({a, 0.0});
      if (signs[k] >= 0) hs.push_back({scale(a, -1.0), 0.0});
    }
    for (int i = 0; i < d_; ++i) {
      Vec e(d_, 0.0);
      e[i] = 1.0;
      hs.push_back({e, 1.0});
      hs.push_back({scale(e, -1.0), 1.0});
    }
    const Polyhedron P = Polyhedron::from_h(d_, hs);
    if (P.empty()) return false;
    // the vertex centroid lies in the relative interior, which is the open cell when it exists
    const Vec p = centroid(P);
    for (size_t k = 0; k < signs.size(); ++k)
      if (signs[k] != 0 && signs[k] * dot(planes_[k], p) <= kStrict) return false;
    return true;
  }

  void dfs(std::vector<int>& signs, std::vector<Polyhedron>& out) {
    if (signs.size() == planes_.size()) {
      Polyhedron N = regular_at(signs);
      if (!N.empty()) out.push_back(N);
      return;
    }
    for (int s : {0, -1, 1}) {
      signs.push_back(s);
      if (open_cell_nonempty(signs)) dfs(signs, out);
      signs.pop_back();
    }
  }

  int d_;
  std::vector<Vec> planes_;
  std::vector<LocalCone> cones_;
};

int plane_index(std::vector<Vec>& planes, const Vec& n, int& sigma) {
  for (size_t k = 0; k < planes.size(); ++k) {
    const double c = dot(planes[k], n);
    if (c >= 1.0 - 1e-9) {
      sigma = 1;
      return static_cast<int>(k);
    }
    if (c <= -1.0 + 1e-9) {
      sigma = -1;
      return static_cast<int>(k);
    }
  }
  planes.push_back(n);
  sigma = 1;
  return static_cast<int>(planes.size()) - 1;
}

Polyhedron linear_image(const Polyhedron& P, const Matrix& M) {
  auto apply = [&](const Vec& v) { return detail::to_vec(M * detail::to_eigen(v)); };
  std::vector<Vec> vs, rs;
  for (const auto& v : P.vertices()) vs.push_back(apply(v));
  for (const auto& r : P.rays()) rs.push_back(apply(r));
  return Polyhedron::from_v(P.dim(), vs, rs);
}

std::vector<Halfspace> unit_ball_constraint(int n, int m) {
  std::vector<int> coords(m);
  std::iota(coords.begin(), coords.end(), n);
  return embed(ball_outer(Vec(m, 0.0), 1.0), n + m, coords);
}

Vec v_part(const Vec& p, int n) { return slice(p, 0, n); }

void push_unique(std::vector<Vec>& xs, const Vec& v) {
  for (const auto& x : xs)
    if (norm(sub(x, v)) <= 1e-9) return;
  xs.push_back(v);
}

}  // namespace

NormalCone normal_cone(const Region& C, const Vec& xbar) {
  if (static_cast<int>(xbar.size()) != C.dim) fail(Errc::DimensionMismatch, "normal_cone: point dimension");
  check_dim(C.dim);
  const int d = C.dim;
  const double tol = 1e-8 * (1.0 + norm(xbar));
  std::vector<Vec> planes;
  std::vector<LocalCone> cones;
  for (const auto& P : C.pieces) {
    if (!P.contains(xbar, tol)) continue;
    LocalCone K;
    for (const auto& h : P.hrep()) {
      if (h.offset - dot(h.normal, xbar) > tol) continue;
      if (norm(h.normal) < 1e-12) continue;
      int sigma = 1;
      K.plane.push_back(plane_index(planes, scale(h.normal, 1.0 / norm(h.normal)), sigma));
      K.sigma.push_back(sigma);
    }
    cones.push_back(std::move(K));
  }
  if (cones.empty()) fail(Errc::NotInSet, "normal_cone: point is not in the set");

  Arrangement A(d, planes, cones);
  NormalCone out;
  out.at = xbar;
  out.regular = A.regular_at(std::vector<int>(planes.size(), 0));
  std::vector<Polyhedron> all = A.cell_cones();
  // keep maximal cones only, first occurrence wins among equals
  out.general = Region(d);
  for (size_t i = 0; i < all.size(); ++i) {
    bool dominated = false;
    for (size_t j = 0; j < all.size() && !dominated; ++j) {
      if (i == j || !cone_subset(all[i], all[j])) continue;
      dominated = !cone_subset(all[j], all[i]) || j < i;
    }
    if (!dominated) out.general.add(all[i]);
  }
  return out;
}

Coderivative coderivative(const SVMap& S, const Vec& xbar, const Vec& ybar) {
  if (S.backend != SVMap::Backend::PolyGraph) fail(Errc::HypothesisFailure, "coderivative needs a polyhedral graph");
  if (static_cast<int>(xbar.size()) != S.dim_in || static_cast<int>(ybar.size()) != S.dim_out)
    fail(Errc::DimensionMismatch, "coderivative: base point dimension");
  Coderivative D;
  D.base = {xbar, ybar};
  D.n = S.dim_in;
  D.m = S.dim_out;
  try {
    D.graph_cones = normal_cone(S.graph, concat(xbar, ybar)).general;
  } catch (const Error& e) {
    if (e.code() == Errc::NotInSet) fail(Errc::NotOnGraph, "coderivative: (x̄, ȳ) is not on the graph");
    throw;
  }
  return D;
}

Region coderiv_apply(const Coderivative& D, const Vec& z) {
  if (static_cast<int>(z.size()) != D.m) fail(Errc::DimensionMismatch, "coderiv_apply: z dimension");
  // move the (-z) block first so slice_at can fix it
  std::vector<int> perm;
  for (int i = 0; i < D.m; ++i) perm.push_back(D.n + i);
  for (int i = 0; i < D.n; ++i) perm.push_back(i);
  Region out(D.n);
  for (const auto& K : D.graph_cones.pieces) out.add(slice_at(K.permute(perm), scale(z, -1.0)));
  return out;
}

bool criterion_holds(const Coderivative& D) {
  std::vector<Halfspace> zero_u;
  for (int i = 0; i < D.m; ++i) {
    Vec e(D.n + D.m, 0.0);
    e[D.n + i] = 1.0;
    zero_u.push_back({e, 0.0});
    zero_u.push_back({scale(e, -1.0), 0.0});
  }
  for (const auto& K : D.graph_cones.pieces) {
    const Polyhedron P = K.meet(zero_u);
    for (const auto& r : P.rays())
      if (norm(v_part(r, D.n)) > 1e-9) return false;
  }
  return true;
}

double mord_kappa(const Coderivative& D, const Vec& w) {
  if (static_cast<int>(w.size()) != D.n) fail(Errc::DimensionMismatch, "mord_kappa: w dimension");
  const auto ball = unit_ball_constraint(D.n, D.m);
  double best = 0.0;
  for (const auto& K : D.graph_cones.pieces) {
    const Polyhedron P = K.meet(ball);
    for (const auto& r : P.rays())
      if (-dot(v_part(r, D.n), w) > 1e-9) return kInf;
    for (const auto& v : P.vertices()) best = std::max(best, -dot(v_part(v, D.n), w));
  }
  return best;
}

std::vector<Vec> kappa_covectors(const Coderivative& D) {
  const auto ball = unit_ball_constraint(D.n, D.m);
  std::vector<Vec> cs;
  for (const auto& K : D.graph_cones.pieces) {
    const Polyhedron P = K.meet(ball);
    for (const auto& v : P.vertices()) push_unique(cs, scale(v_part(v, D.n), -1.0));
  }
  std::sort(cs.begin(), cs.end());
  return cs;
}

HomogMap mord_T(const Coderivative& D) {
  if (!criterion_holds(D)) fail(Errc::CriterionFails, "D*S(x̄|ȳ)(0) contains a nonzero v");
  const int n = D.n, m = D.m;
  const Polyhedron B = ball_outer(Vec(m, 0.0), 1.0);
  Region g(n + m);
  for (const auto& c : kappa_covectors(D)) {
    // <e, y> <= o_e <c, w> for every facet (e, o_e) of the unit ball polytope
    std::vector<Halfspace> hs;
    for (const auto& f : B.hrep()) hs.push_back({concat(scale(c, -f.offset), f.normal), 0.0});
    g.add(Polyhedron::from_h(n + m, hs));
  }
  return HomogMap::cone(n, m, g);
}

double graphical_modulus(const Coderivative& D) {
  if (!criterion_holds(D)) return kInf;
  double best = 0.0;
  for (const auto& c : kappa_covectors(D)) best = std::max(best, norm(c));
  return best;
}

HomogMap precise_T(const SVMap& S, const Vec& xbar, const Vec& ybar, const std::vector<BranchTransform>& branches) {
  if (branches.empty()) fail(Errc::PartitionGap, "precise_T: no branches");
  const int n = S.dim_in, m = S.dim_out;
  for (const auto& b : branches) {
    if (b.g.rows() != m || b.g.cols() != m || b.f.rows() != m || b.f.cols() != n || b.cell.dim() != n)
      fail(Errc::DimensionMismatch, "precise_T: branch shape");
    if (std::abs(b.g.determinant()) < 1e-12) fail(Errc::HypothesisFailure, "precise_T: g is singular");
  }
  std::vector<Vec> dirs = unit_directions(n, n == 1 ? 2 : 64);
  for (int i = 0; i < n; ++i) {
    Vec e(n, 0.0);
    e[i] = 1.0;
    dirs.push_back(e);
    dirs.push_back(scale(e, -1.0));
  }
  for (const auto& w : dirs) {
    bool covered = false;
    for (const auto& b : branches) covered = covered || b.cell.contains(w, 1e-9);
    if (!covered) fail(Errc::PartitionGap, "precise_T: a direction is not covered by any branch");
  }

  Region out(n + m);
  std::vector<int> xcoords(n);
  std::iota(xcoords.begin(), xcoords.end(), 0);
  for (const auto& b : branches) {
    Matrix M = Matrix::Identity(n + m, n + m);
    M.block(n, 0, m, n) = b.f;
    M.block(n, n, m, m) = b.g;
    Region tg(n + m);
    for (const auto& P : S.graph.pieces) tg.add(linear_image(P, M));
    const SVMap St = SVMap::poly_graph(n, m, tg, S.domain);
    const Vec yt = detail::to_vec(b.g * detail::to_eigen(ybar) + b.f * detail::to_eigen(xbar));
    const HomogMap Tt = mord_T(coderivative(St, xbar, yt));
    // gph T_i = M^{-1} gph T~, restricted to the branch's directions
    const Matrix Minv = M.inverse();
    const auto cell = embed(b.cell, n + m, xcoords);
    for (const auto& P : Tt.graph.pieces) out.add(linear_image(P, Minv).meet(cell));
  }
  return HomogMap::cone(n, m, out);
}

}  // namespace tdiff
