#include "tdiff/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <deque>
#include <mutex>
#include <random>
#include <string>

#include "linalg.hpp"

namespace tdiff {

using detail::Col;
using detail::Mat;

namespace detail {

Mat kernel(const Mat& M, int d, double tol) {
  if (M.rows() == 0) return Mat::Identity(d, d);
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++rank;
  return svd.matrixV().rightCols(d - rank);
}

int rank_of(const Mat& M, double tol) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(M);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++rank;
  return rank;
}

void for_each_combo(int k, int r, const std::function<bool(const std::vector<int>&)>& fn) {
  if (r < 0 || r > k) return;
  std::vector<int> idx(r);
  for (int i = 0; i < r; ++i) idx[i] = i;
  while (true) {
    if (fn(idx)) return;
    int i = r - 1;
    while (i >= 0 && idx[i] == k - r + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace detail

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) fail(Errc::DimensionMismatch, "dot of vectors with different sizes");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

Vec add(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) fail(Errc::DimensionMismatch, "add of vectors with different sizes");
  Vec r(a);
  for (size_t i = 0; i < a.size(); ++i) r[i] += b[i];
  return r;
}

Vec sub(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) fail(Errc::DimensionMismatch, "sub of vectors with different sizes");
  Vec r(a);
  for (size_t i = 0; i < a.size(); ++i) r[i] -= b[i];
  return r;
}

Vec scale(const Vec& a, double k) {
  Vec r(a);
  for (double& x : r) x *= k;
  return r;
}

Vec concat(const Vec& a, const Vec& b) {
  Vec r(a);
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

Vec slice(const Vec& a, int from, int len) { return Vec(a.begin() + from, a.begin() + from + len); }

void check_dim(int dim) {
  if (dim < 1) fail(Errc::DimensionMismatch, "dimension must be positive");
  if (dim > kMaxDim)
    fail(Errc::UnsupportedDimension, "exact polyhedral operations need dim <= 4, got " + std::to_string(dim));
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool near(const Vec& a, const Vec& b, double tol) {
  for (size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol) return false;
  return true;
}

void push_unique(std::vector<Vec>& vs, const Vec& v, double tol) {
  const double t = tol * (1.0 + inf_norm(v));
  for (const Vec& u : vs)
    if (near(u, v, t)) return;
  vs.push_back(v);
}

bool normalize(std::vector<Halfspace>& hs, bool& infeasible) {
  std::vector<Halfspace> out;
  infeasible = false;
  for (auto& h : hs) {
    const double n = norm(h.normal);
    if (n <= kEps) {
      if (h.offset < -kEps) infeasible = true;
      continue;
    }
    Halfspace g{scale(h.normal, 1.0 / n), h.offset / n};
    bool dup = false;
    for (auto& o : out) {
      if (near(o.normal, g.normal, 1e-12)) {
        o.offset = std::min(o.offset, g.offset);
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(std::move(g));
  }
  hs = std::move(out);
  return !infeasible;
}

double feas_tol(const Vec& z) { return 1e-9 * (1.0 + inf_norm(z)); }

bool satisfies(const std::vector<Halfspace>& hs, const Vec& z, double tol) {
  for (const auto& h : hs)
    if (dot(h.normal, z) - h.offset > tol) return false;
  return true;
}

// 1-D polyhedra are intervals [lo, hi] with infinite ends allowed.
Polyhedron interval(double lo, double hi) {
  std::vector<Halfspace> hs;
  if (hi < kInf) hs.push_back({{1.0}, hi});
  if (lo > -kInf) hs.push_back({{-1.0}, -lo});
  if (lo > hi + kEps * (1.0 + std::abs(lo) + std::abs(hi))) return Polyhedron::from_parts(1, hs, {}, {});
  if (lo > hi) lo = hi = 0.5 * (lo + hi);
  std::vector<Vec> v, r;
  if (lo > -kInf && hi < kInf) {
    v.push_back({lo});
    if (hi - lo > kEps * (1.0 + std::abs(lo))) v.push_back({hi});
  } else if (lo > -kInf) {
    v.push_back({lo});
    r.push_back({1.0});
  } else if (hi < kInf) {
    v.push_back({hi});
    r.push_back({-1.0});
  } else {
    v.push_back({0.0});
    r.push_back({1.0});
    r.push_back({-1.0});
  }
  return Polyhedron::from_parts(1, hs, v, r);
}

void interval_bounds(const Polyhedron& P, double& lo, double& hi) {
  lo = -kInf;
  hi = kInf;
  for (const auto& h : P.hrep()) {
    if (h.normal[0] > 0) hi = std::min(hi, h.offset / h.normal[0]);
    else lo = std::max(lo, h.offset / h.normal[0]);
  }
}

}  // namespace

Polyhedron Polyhedron::from_parts(int dim, std::vector<Halfspace> hs, std::vector<Vec> verts,
                                  std::vector<Vec> rays) {
  Polyhedron P;
  P.dim_ = dim;
  P.h_ = std::move(hs);
  P.v_ = std::move(verts);
  P.r_ = std::move(rays);
  return P;
}

Polyhedron Polyhedron::from_h(int dim, std::vector<Halfspace> hs) {
  check_dim(dim);
  for (const auto& h : hs)
    if (static_cast<int>(h.normal.size()) != dim) fail(Errc::DimensionMismatch, "halfspace normal dimension");
  bool infeasible = false;
  normalize(hs, infeasible);
  if (infeasible) return from_parts(dim, {{Vec(dim, 0.0), -1.0}}, {}, {});
  if (dim == 1) {
    Polyhedron tmp = from_parts(1, hs, {}, {});
    double lo, hi;
    interval_bounds(tmp, lo, hi);
    return interval(lo, hi);
  }

  const int k = static_cast<int>(hs.size());
  Mat A(k, dim);
  Col b(k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < dim; ++j) A(i, j) = hs[i].normal[j];
    b(i) = hs[i].offset;
  }
  const Mat L = detail::kernel(A, dim);
  const int l = static_cast<int>(L.cols());
  const int r = dim - l;
  const Mat E = L.transpose();

  std::vector<Vec> verts, rays;
  if (r == 0) {
    Vec z(dim, 0.0);
    if (satisfies(hs, z, feas_tol(z))) verts.push_back(z);
  } else {
    Mat M(dim, dim);
    Col rhs(dim);
    M.bottomRows(l) = E;
    rhs.tail(l).setZero();
    detail::for_each_combo(k, r, [&](const std::vector<int>& S) {
      for (int i = 0; i < r; ++i) {
        M.row(i) = A.row(S[i]);
        rhs(i) = b(S[i]);
      }
      Eigen::FullPivLU<Mat> lu(M);
      lu.setThreshold(1e-10);
      if (!lu.isInvertible()) return false;
      Vec z = detail::to_vec(lu.solve(rhs));
      if (satisfies(hs, z, feas_tol(z))) push_unique(verts, z, 1e-8);
      return false;
    });
    if (!verts.empty()) {
      Mat N(r - 1 + l, dim);
      N.bottomRows(l) = E;
      detail::for_each_combo(k, r - 1, [&](const std::vector<int>& S) {
        for (int i = 0; i < r - 1; ++i) N.row(i) = A.row(S[i]);
        const Mat K = detail::kernel(N, dim);
        if (K.cols() != 1) return false;
        Vec u = detail::to_vec(K.col(0));
        for (double sgn : {1.0, -1.0}) {
          Vec s = scale(u, sgn);
          bool ok = true;
          for (const auto& h : hs)
            if (dot(h.normal, s) > 1e-9) {
              ok = false;
              break;
            }
          if (ok) push_unique(rays, s, 1e-8);
        }
        return false;
      });
    }
  }
  if (!verts.empty()) {
    for (int j = 0; j < l; ++j) {
      Vec u = detail::to_vec(L.col(j));
      push_unique(rays, u, 1e-8);
      push_unique(rays, scale(u, -1.0), 1e-8);
    }
  }
  if (verts.empty()) rays.clear();
  return from_parts(dim, std::move(hs), std::move(verts), std::move(rays));
}

Polyhedron Polyhedron::from_v(int dim, std::vector<Vec> verts, std::vector<Vec> rays) {
  check_dim(dim);
  for (const auto& v : verts)
    if (static_cast<int>(v.size()) != dim) fail(Errc::DimensionMismatch, "vertex dimension");
  for (const auto& v : rays)
    if (static_cast<int>(v.size()) != dim) fail(Errc::DimensionMismatch, "ray dimension");
  if (verts.empty()) return empty_set(dim);
  std::vector<Vec> pts, dirs;
  for (const auto& v : verts) push_unique(pts, v, 1e-10);
  for (const auto& r : rays) {
    const double n = norm(r);
    if (n > kEps) push_unique(dirs, scale(r, 1.0 / n), 1e-10);
  }
  if (dim == 1) {
    double lo = kInf, hi = -kInf;
    for (const auto& p : pts) {
      lo = std::min(lo, p[0]);
      hi = std::max(hi, p[0]);
    }
    for (const auto& r : dirs) {
      if (r[0] > 0) hi = kInf;
      else lo = -kInf;
    }
    return interval(lo, hi);
  }

  const Vec& p0 = pts[0];
  int np = static_cast<int>(pts.size());
  const int nr = static_cast<int>(dirs.size());
  Mat D(dim, np - 1 + nr);
  for (int i = 1; i < np; ++i) D.col(i - 1) = detail::to_eigen(sub(pts[i], p0));
  for (int j = 0; j < nr; ++j) D.col(np - 1 + j) = detail::to_eigen(dirs[j]);

  Mat U(dim, 0), Nc = Mat::Identity(dim, dim);
  if (D.cols() > 0) {
    // Scale-aware rank: generator spreads can be tiny.
    double scl = std::max(1.0, D.cwiseAbs().maxCoeff());
    Eigen::JacobiSVD<Mat> svd(D, Eigen::ComputeFullU);
    int rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > 1e-9 * scl) ++rank;
    U = svd.matrixU().leftCols(rank);
    Nc = svd.matrixU().rightCols(dim - rank);
  }
  const int k = static_cast<int>(U.cols());
  std::vector<Halfspace> hs;
  for (int j = 0; j < Nc.cols(); ++j) {
    Vec n = detail::to_vec(Nc.col(j));
    const double c = dot(n, p0);
    hs.push_back({n, c});
    hs.push_back({scale(n, -1.0), -c});
  }
  if (k > 0) {
    const Col e0 = detail::to_eigen(p0);
    std::vector<Col> q(np), s(nr);
    for (int i = 0; i < np; ++i) q[i] = U.transpose() * (detail::to_eigen(pts[i]) - e0);
    for (int j = 0; j < nr; ++j) s[j] = U.transpose() * detail::to_eigen(dirs[j]);
    // Planar polytopes: keep only hull vertices so the facet search below stays small for
    // large inputs such as Minkowski sums.
    if (k == 2 && nr == 0 && np > 8) {
      std::sort(q.begin(), q.end(), [](const Col& a, const Col& b) { return a(0) < b(0) || (a(0) == b(0) && a(1) < b(1)); });
      auto cross = [](const Col& o, const Col& a, const Col& b) {
        return (a(0) - o(0)) * (b(1) - o(1)) - (a(1) - o(1)) * (b(0) - o(0));
      };
      std::vector<Col> hull(2 * q.size());
      std::size_t h = 0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        while (h >= 2 && cross(hull[h - 2], hull[h - 1], q[i]) <= 0) --h;
        hull[h++] = q[i];
      }
      for (std::size_t i = q.size() - 1, lower = h + 1; i-- > 0;) {
        while (h >= lower && cross(hull[h - 2], hull[h - 1], q[i]) <= 0) --h;
        hull[h++] = q[i];
      }
      hull.resize(h - 1);
      q = std::move(hull);
      np = static_cast<int>(q.size());
    }
    double spread = 1.0;
    for (const auto& qi : q) spread = std::max(spread, qi.cwiseAbs().maxCoeff());
    const double tol = 1e-9 * spread;
    std::vector<std::pair<Col, double>> facets;
    detail::for_each_combo(np + nr, k, [&](const std::vector<int>& S) {
      int first = -1;
      for (int g : S)
        if (g < np) {
          first = g;
          break;
        }
      if (first < 0) return false;
      Mat M(k - 1, k);
      int row = 0;
      for (int g : S) {
        if (g == first) continue;
        M.row(row++) = (g < np ? Col(q[g] - q[first]) : s[g - np]).transpose();
      }
      const Mat K = detail::kernel(M, k, 1e-10 * spread);
      if (K.cols() != 1) return false;
      Col a = K.col(0);
      double bb = a.dot(q[first]);
      double mx = -kInf, mn = kInf, rmx = -kInf, rmn = kInf;
      for (const auto& qi : q) {
        const double v = a.dot(qi) - bb;
        mx = std::max(mx, v);
        mn = std::min(mn, v);
      }
      for (const auto& sj : s) {
        const double v = a.dot(sj);
        rmx = std::max(rmx, v);
        rmn = std::min(rmn, v);
      }
      if (nr == 0) rmx = rmn = 0.0;
      if (mx <= tol && rmx <= 1e-9) {
      } else if (mn >= -tol && rmn >= -1e-9) {
        a = -a;
        bb = -bb;
      } else {
        return false;
      }
      for (const auto& f : facets)
        if ((f.first - a).cwiseAbs().maxCoeff() < 1e-9 && std::abs(f.second - bb) < tol) return false;
      facets.emplace_back(a, bb);
      return false;
    });
    for (const auto& f : facets) {
      Col ag = U * f.first;
      hs.push_back({detail::to_vec(ag), f.second + ag.dot(e0)});
    }
  }
  return from_h(dim, std::move(hs));
}

Polyhedron Polyhedron::point(const Vec& p) {
  check_dim(static_cast<int>(p.size()));
  const int d = static_cast<int>(p.size());
  if (d == 1) return interval(p[0], p[0]);
  std::vector<Halfspace> hs;
  for (int i = 0; i < d; ++i) {
    Vec e(d, 0.0);
    e[i] = 1.0;
    hs.push_back({e, p[i]});
    e[i] = -1.0;
    hs.push_back({e, -p[i]});
  }
  return from_parts(d, hs, {p}, {});
}

Polyhedron Polyhedron::segment(const Vec& a, const Vec& b) {
  return from_v(static_cast<int>(a.size()), {a, b});
}

Polyhedron Polyhedron::box(const Vec& lo, const Vec& hi) {
  const int d = static_cast<int>(lo.size());
  check_dim(d);
  if (d == 1) return interval(lo[0], hi[0]);
  std::vector<Halfspace> hs;
  for (int i = 0; i < d; ++i) {
    Vec e(d, 0.0);
    e[i] = 1.0;
    hs.push_back({e, hi[i]});
    e[i] = -1.0;
    hs.push_back({e, -lo[i]});
  }
  std::vector<Vec> verts;
  for (int mask = 0; mask < (1 << d); ++mask) {
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = (mask >> i & 1) ? hi[i] : lo[i];
    push_unique(verts, v, 1e-12);
  }
  for (int i = 0; i < d; ++i)
    if (lo[i] > hi[i]) return from_parts(d, hs, {}, {});
  return from_parts(d, hs, verts, {});
}

Polyhedron Polyhedron::whole(int dim) {
  check_dim(dim);
  std::vector<Vec> rays;
  for (int i = 0; i < dim; ++i) {
    Vec e(dim, 0.0);
    e[i] = 1.0;
    rays.push_back(e);
    e[i] = -1.0;
    rays.push_back(e);
  }
  return from_parts(dim, {}, {Vec(dim, 0.0)}, rays);
}

Polyhedron Polyhedron::empty_set(int dim) { return from_parts(dim, {{Vec(dim, 0.0), -1.0}}, {}, {}); }

bool Polyhedron::contains(const Vec& p, double tol) const {
  if (empty()) return false;
  if (static_cast<int>(p.size()) != dim_) fail(Errc::DimensionMismatch, "point dimension");
  for (const auto& h : h_)
    if (dot(h.normal, p) - h.offset > tol * (1.0 + std::abs(h.offset))) return false;
  return true;
}

Polyhedron Polyhedron::meet(const std::vector<Halfspace>& extra) const {
  std::vector<Halfspace> hs = h_;
  hs.insert(hs.end(), extra.begin(), extra.end());
  return from_h(dim_, std::move(hs));
}

Polyhedron Polyhedron::translate(const Vec& t) const {
  std::vector<Halfspace> hs;
  for (const auto& h : h_) hs.push_back({h.normal, h.offset + dot(h.normal, t)});
  std::vector<Vec> vs;
  for (const auto& v : v_) vs.push_back(add(v, t));
  return from_parts(dim_, hs, vs, r_);
}

Polyhedron Polyhedron::permute(const std::vector<int>& perm) const {
  auto pv = [&](const Vec& v) {
    Vec o(v.size());
    for (size_t i = 0; i < perm.size(); ++i) o[i] = v[perm[i]];
    return o;
  };
  std::vector<Halfspace> hs;
  for (const auto& h : h_) hs.push_back({pv(h.normal), h.offset});
  std::vector<Vec> vs, rs;
  for (const auto& v : v_) vs.push_back(pv(v));
  for (const auto& r : r_) rs.push_back(pv(r));
  return from_parts(dim_, hs, vs, rs);
}

Polyhedron Polyhedron::negate() const {
  std::vector<Halfspace> hs;
  for (const auto& h : h_) hs.push_back({scale(h.normal, -1.0), h.offset});
  std::vector<Vec> vs, rs;
  for (const auto& v : v_) vs.push_back(scale(v, -1.0));
  for (const auto& r : r_) rs.push_back(scale(r, -1.0));
  return from_parts(dim_, hs, vs, rs);
}

Polyhedron Polyhedron::scaled(double k) const {
  std::vector<Halfspace> hs;
  for (const auto& h : h_) hs.push_back({h.normal, h.offset * k});
  std::vector<Vec> vs;
  for (const auto& v : v_) vs.push_back(scale(v, k));
  return from_parts(dim_, hs, vs, r_);
}

Region::Region(int d, std::vector<Polyhedron> ps) : dim(d) {
  for (auto& p : ps) add(p);
}

void Region::add(const Polyhedron& p) {
  if (p.dim() != dim) fail(Errc::DimensionMismatch, "region piece dimension");
  if (!p.empty()) pieces.push_back(p);
}

bool Region::bounded() const {
  for (const auto& p : pieces)
    if (!p.bounded()) return false;
  return true;
}

bool Region::contains(const Vec& p, double tol) const {
  for (const auto& q : pieces)
    if (q.contains(p, tol)) return true;
  return false;
}

double dist_point_poly(const Vec& p, const Polyhedron& P, Vec* nearest) {
  if (P.empty()) return kInf;
  const int d = P.dim();
  if (static_cast<int>(p.size()) != d) fail(Errc::DimensionMismatch, "point/polyhedron dimension");
  if (d == 1) {
    double lo, hi;
    interval_bounds(P, lo, hi);
    const double z = std::clamp(p[0], lo, hi);
    if (nearest) *nearest = {z};
    return std::abs(p[0] - z);
  }
  if (P.contains(p)) {
    if (nearest) *nearest = p;
    return 0.0;
  }
  const auto& hs = P.hrep();
  const int k = static_cast<int>(hs.size());
  const Col e = detail::to_eigen(p);
  double best = kInf;
  Vec best_z;
  bool done = false;
  for (int s = 1; s <= std::min(k, d) && !done; ++s) {
    detail::for_each_combo(k, s, [&](const std::vector<int>& S) {
      Mat A(s, d);
      Col b(s);
      for (int i = 0; i < s; ++i) {
        A.row(i) = detail::to_eigen(hs[S[i]].normal).transpose();
        b(i) = hs[S[i]].offset;
      }
      const Mat G = A * A.transpose();
      Eigen::LDLT<Mat> ldlt(G);
      if (std::abs(G.determinant()) < 1e-12) return false;
      const Col lam = ldlt.solve(A * e - b);
      const Col z = e - A.transpose() * lam;
      Vec zv = detail::to_vec(z);
      if (!satisfies(hs, zv, feas_tol(zv))) return false;
      const double dz = (z - e).norm();
      if (dz < best) {
        best = dz;
        best_z = zv;
      }
      if (lam.minCoeff() >= -1e-12) {
        done = true;
        return true;
      }
      return false;
    });
  }
  if (best == kInf) {
    // Numerical fallback: nearest generator combination is not needed at desk scale.
    for (const auto& v : P.vertices()) {
      const double dv = norm(sub(p, v));
      if (dv < best) {
        best = dv;
        best_z = v;
      }
    }
  }
  if (nearest) *nearest = best_z;
  return best;
}

double dist_point_region(const Vec& p, const Region& R) {
  if (R.empty()) fail(Errc::EmptyRegion, "distance to an empty region");
  if (static_cast<int>(p.size()) != R.dim) fail(Errc::DimensionMismatch, "point/region dimension");
  double best = kInf;
  for (const auto& q : R.pieces) {
    best = std::min(best, dist_point_poly(p, q));
    if (best == 0.0) break;
  }
  return best;
}

Polyhedron truncation_box(const Ball& b) {
  Vec lo = b.center, hi = b.center;
  for (size_t i = 0; i < lo.size(); ++i) {
    lo[i] -= b.radius;
    hi[i] += b.radius;
  }
  return Polyhedron::box(lo, hi);
}

Region intersect(const Region& R, const Polyhedron& P) {
  if (R.dim != P.dim()) fail(Errc::DimensionMismatch, "intersect dimension");
  Region out(R.dim);
  for (const auto& q : R.pieces) {
    if (R.dim == 1) {
      double a0, a1, b0, b1;
      interval_bounds(q, a0, a1);
      interval_bounds(P, b0, b1);
      out.add(interval(std::max(a0, b0), std::min(a1, b1)));
    } else {
      out.add(q.meet(P));
    }
  }
  return out;
}

Region truncate(const Region& R, const Ball& b) { return intersect(R, truncation_box(b)); }

Region translate(const Region& R, const Vec& t) {
  Region out(R.dim);
  for (const auto& q : R.pieces) out.add(q.translate(t));
  return out;
}

std::vector<Vec> sample_points(const Polyhedron& P, int per_segment) {
  if (!P.bounded()) fail(Errc::UnboundedWithoutTruncation, "sampling an unbounded piece");
  std::vector<Vec> out = P.vertices();
  const auto& v = P.vertices();
  const size_t nv = v.size();
  for (size_t i = 0; i < nv; ++i)
    for (size_t j = i + 1; j < nv; ++j)
      for (int s = 1; s <= per_segment; ++s) {
        const double t = static_cast<double>(s) / (per_segment + 1);
        out.push_back(add(scale(v[i], 1.0 - t), scale(v[j], t)));
      }
  if (nv > 2) {
    Vec c(P.dim(), 0.0);
    for (const auto& x : v) c = add(c, x);
    out.push_back(scale(c, 1.0 / static_cast<double>(nv)));
  }
  return out;
}

std::vector<Vec> sample_points(const Region& R, int per_segment) {
  std::vector<Vec> out;
  for (const auto& q : R.pieces) {
    auto s = sample_points(q, per_segment);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

double hausdorff(const Region& C, const Region& D, const std::optional<Ball>& truncation) {
  if (C.empty() || D.empty()) fail(Errc::EmptyRegion, "hausdorff of an empty region");
  if (C.dim != D.dim) fail(Errc::DimensionMismatch, "hausdorff dimension");
  Region c = C, d = D;
  if (!C.bounded() || !D.bounded()) {
    if (!truncation) fail(Errc::UnboundedWithoutTruncation, "hausdorff of unbounded regions");
    c = truncate(C, *truncation);
    d = truncate(D, *truncation);
    if (c.empty() || d.empty()) fail(Errc::EmptyRegion, "truncation removed a region");
  }
  auto one_sided = [](const Region& a, const Region& b) {
    double m = 0.0;
    for (const auto& p : sample_points(a, 8)) m = std::max(m, dist_point_region(p, b));
    return m;
  };
  return std::max(one_sided(c, d), one_sided(d, c));
}

Polyhedron minkowski_sum(const Polyhedron& A, const Polyhedron& B) {
  if (A.dim() != B.dim()) fail(Errc::DimensionMismatch, "minkowski_sum dimension");
  if (A.empty() || B.empty()) return Polyhedron::empty_set(A.dim());
  std::vector<Vec> verts;
  for (const auto& a : A.vertices())
    for (const auto& b : B.vertices()) verts.push_back(add(a, b));
  std::vector<Vec> rays = A.rays();
  rays.insert(rays.end(), B.rays().begin(), B.rays().end());
  return Polyhedron::from_v(A.dim(), verts, rays);
}

Region minkowski_sum(const Region& A, const Region& B) {
  if (A.dim != B.dim) fail(Errc::DimensionMismatch, "minkowski_sum dimension");
  Region out(A.dim);
  for (const auto& a : A.pieces)
    for (const auto& b : B.pieces) out.add(minkowski_sum(a, b));
  return out;
}

double support(const Region& R, const Vec& u) {
  if (R.empty()) fail(Errc::EmptyRegion, "support of an empty region");
  if (static_cast<int>(u.size()) != R.dim) fail(Errc::DimensionMismatch, "support direction dimension");
  double best = -kInf;
  for (const auto& q : R.pieces) {
    for (const auto& r : q.rays())
      if (dot(u, r) > kEps) return kInf;
    for (const auto& v : q.vertices()) best = std::max(best, dot(u, v));
  }
  return best;
}

double gauge(const Region& C, const Vec& w) {
  if (C.empty()) fail(Errc::EmptyRegion, "gauge of an empty set");
  if (C.pieces.size() != 1) fail(Errc::NotReachable, "gauge needs a single convex piece");
  if (static_cast<int>(w.size()) != C.dim) fail(Errc::DimensionMismatch, "gauge dimension");
  if (norm(w) <= kEps) return 0.0;
  double lo = 0.0, hi = kInf;
  for (const auto& h : C.pieces[0].hrep()) {
    const double aw = dot(h.normal, w);
    if (h.offset > kEps) {
      lo = std::max(lo, aw / h.offset);
    } else if (h.offset < -kEps) {
      hi = std::min(hi, aw / h.offset);
    } else if (aw > kEps) {
      fail(Errc::NotReachable, "direction leaves the cone of the set");
    }
  }
  if (lo > hi * (1.0 + 1e-12) + kEps) fail(Errc::NotReachable, "direction not in the cone of the set");
  return lo;
}

namespace {

std::vector<Vec> ball_normals(int dim, int level) {
  std::vector<Vec> ns;
  const int count = 2 * dim * level;
  if (dim == 2) {
    for (int j = 0; j < count; ++j) {
      const double a = 2.0 * M_PI * j / count;
      ns.push_back({std::cos(a), std::sin(a)});
    }
    return ns;
  }
  for (int i = 0; i < dim; ++i) {
    Vec e(dim, 0.0);
    e[i] = 1.0;
    ns.push_back(e);
    e[i] = -1.0;
    ns.push_back(e);
  }
  if (dim == 3) {
    const int extra = count - 2 * dim;
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < extra; ++j) {
      const double z = 1.0 - 2.0 * (j + 0.5) / extra;
      const double r = std::sqrt(1.0 - z * z);
      ns.push_back({r * std::cos(golden * j), r * std::sin(golden * j), z});
    }
  } else {
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> g;
    while (static_cast<int>(ns.size()) < count) {
      Vec v(dim);
      for (double& x : v) x = g(rng);
      ns.push_back(scale(v, 1.0 / norm(v)));
    }
  }
  return ns;
}

const Polyhedron& unit_ball_outer(int dim, int level) {
  static std::mutex mu;
  static std::deque<std::pair<std::pair<int, int>, Polyhedron>> cache;
  std::lock_guard<std::mutex> lock(mu);
  for (const auto& e : cache)
    if (e.first == std::make_pair(dim, level)) return e.second;
  std::vector<Halfspace> hs;
  for (const auto& n : ball_normals(dim, level)) hs.push_back({n, 1.0});
  cache.emplace_back(std::make_pair(dim, level), Polyhedron::from_h(dim, hs));
  return cache.back().second;
}

}  // namespace

double ball_outer_factor(int dim, int level) {
  check_dim(dim);
  if (dim == 1) return 1.0;
  double m = 0.0;
  for (const auto& v : unit_ball_outer(dim, level).vertices()) m = std::max(m, norm(v));
  return m;
}

Polyhedron ball_outer(const Vec& center, double r, int level) {
  const int d = static_cast<int>(center.size());
  check_dim(d);
  if (d == 1) return interval(center[0] - r, center[0] + r);
  if (r <= 0.0) return Polyhedron::point(center);
  Polyhedron unit = unit_ball_outer(d, level);
  return unit.scaled(r).translate(center);
}

Polyhedron ball_inner(const Vec& center, double r, int level) {
  const int d = static_cast<int>(center.size());
  return ball_outer(center, r / ball_outer_factor(d, level), level);
}

}  // namespace tdiff

namespace tdiff {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::EmptyRegion: return "EmptyRegion";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::UnboundedWithoutTruncation: return "UnboundedWithoutTruncation";
    case Errc::NotReachable: return "NotReachable";
    case Errc::OutsideDomain: return "OutsideDomain";
    case Errc::OracleNotInvertible: return "OracleNotInvertible";
    case Errc::EvaluationFailure: return "EvaluationFailure";
    case Errc::NotOnGraph: return "NotOnGraph";
    case Errc::CoverageGap: return "CoverageGap";
    case Errc::NotScalar: return "NotScalar";
    case Errc::InsufficientSamples: return "InsufficientSamples";
    case Errc::NotInSet: return "NotInSet";
    case Errc::CriterionFails: return "CriterionFails";
    case Errc::PartitionGap: return "PartitionGap";
    case Errc::HypothesisFailure: return "HypothesisFailure";
    case Errc::GaugeUnbounded: return "GaugeUnbounded";
    case Errc::ComplexityBudgetExceeded: return "ComplexityBudgetExceeded";
    case Errc::UnsupportedDimension: return "UnsupportedDimension";
    case Errc::ParseError: return "ParseError";
    case Errc::UnknownName: return "UnknownName";
  }
  return "Unknown";
}

}  // namespace tdiff

namespace tdiff {

Polyhedron slice_at(const Polyhedron& P, const Vec& x) {
  const int n = static_cast<int>(x.size());
  const int m = P.dim() - n;
  if (m < 1) fail(Errc::DimensionMismatch, "slice point longer than graph space");
  std::vector<Halfspace> hs;
  hs.reserve(P.hrep().size());
  for (const auto& h : P.hrep()) {
    double b = h.offset;
    for (int i = 0; i < n; ++i) b -= h.normal[i] * x[i];
    Vec a(h.normal.begin() + n, h.normal.end());
    if (norm(a) <= 1e-12) {
      if (b < -kEps * (1.0 + std::abs(h.offset))) return Polyhedron::empty_set(m);
      continue;
    }
    hs.push_back({std::move(a), b});
  }
  return Polyhedron::from_h(m, std::move(hs));
}

Region slice_at(const Region& graph, const Vec& x) {
  Region out(graph.dim - static_cast<int>(x.size()));
  for (const auto& p : graph.pieces) out.add(slice_at(p, x));
  return out;
}

std::vector<Halfspace> embed(const Polyhedron& P, int dim, const std::vector<int>& coords) {
  std::vector<Halfspace> hs;
  for (const auto& h : P.hrep()) {
    Vec a(dim, 0.0);
    for (size_t i = 0; i < coords.size(); ++i) a[coords[i]] = h.normal[i];
    hs.push_back({a, h.offset});
  }
  return hs;
}

}  // namespace tdiff
