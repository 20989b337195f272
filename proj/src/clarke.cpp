#include "tdiff/clarke.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace tdiff {

namespace {

constexpr double kSnap = 1e-6;

void require_scalar(const SmoothSampler& f) {
  if (f.m != 1) fail(Errc::NotScalar, "operation needs a scalar function");
}

double f1(const SmoothSampler& f, const Vec& x) {
  const Vec y = f.f(x);
  if (y.size() != 1 || !std::isfinite(y[0])) fail(Errc::EvaluationFailure, "scalar evaluation failed");
  return y[0];
}

Vec eval_checked(const SmoothSampler& f, const Vec& x) {
  Vec y = f.f(x);
  if (static_cast<int>(y.size()) != f.m) fail(Errc::EvaluationFailure, "function returned wrong dimension");
  for (double v : y)
    if (!std::isfinite(v)) fail(Errc::EvaluationFailure, "function value not finite");
  return y;
}

Vec flatten(const Matrix& A) {
  Vec out;
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) out.push_back(A(i, j));
  return out;
}

Matrix unflatten(const Vec& v, int m, int n) {
  Matrix A(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = v[i * n + j];
  return A;
}

Region hull_of(std::vector<Vec> pts) {
  for (auto& p : pts)
    for (auto& c : p) c = std::round(c / kSnap) * kSnap;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const int d = static_cast<int>(pts.front().size());
  check_dim(d);
  if (d == 1) {
    auto [lo, hi] = std::minmax_element(pts.begin(), pts.end());
    return Region::of(Polyhedron::segment(*lo, *hi));
  }
  return Region::of(Polyhedron::from_v(d, pts));
}

}  // namespace

double fd_step(const Vec& xbar) { return 1e-6 * (1.0 + norm(xbar)); }

Matrix fd_jacobian(const SmoothSampler& f, const Vec& x, double h) {
  if (f.grad) return (*f.grad)(x);
  Matrix J(f.m, f.n);
  for (int j = 0; j < f.n; ++j) {
    Vec a = x, b = x;
    a[j] += h;
    b[j] -= h;
    const Vec fa = eval_checked(f, a), fb = eval_checked(f, b);
    for (int i = 0; i < f.m; ++i) J(i, j) = (fa[i] - fb[i]) / (2 * h);
  }
  return J;
}

bool flagged_nondiff(const SmoothSampler& f, const Vec& x, double h, double lipschitz) {
  const Vec f0 = eval_checked(f, x);
  const double tol = 100.0 * h * std::max(lipschitz, 1.0);
  for (int j = 0; j < f.n; ++j) {
    Vec a = x, b = x;
    a[j] += h;
    b[j] -= h;
    const Vec fa = eval_checked(f, a), fb = eval_checked(f, b);
    for (int i = 0; i < f.m; ++i)
      if (std::abs((fa[i] - f0[i]) / h - (f0[i] - fb[i]) / h) > tol) return true;
  }
  return false;
}

DirDeriv clarke_dirderiv(const SmoothSampler& f, const Vec& xbar, const Vec& v, const std::vector<double>& ladder) {
  require_scalar(f);
  if (static_cast<int>(v.size()) != f.n || static_cast<int>(xbar.size()) != f.n)
    fail(Errc::DimensionMismatch, "direction dimension");
  DirDeriv out;
  out.ladder = ladder;
  const double nv = norm(v);
  for (size_t k = 0; k < ladder.size(); ++k) {
    const double r = ladder[k];
    if (nv == 0) {
      out.per_rung.push_back(0.0);
      continue;
    }
    double best = -std::numeric_limits<double>::infinity();
    const int per_axis = f.n == 1 ? 21 : 9;
    // step lengths t |v| are fixed so the quotients scale exactly with |v|
    for (const auto& x : neighborhood_grid(xbar, r, per_axis, 2, k, std::nullopt)) {
      const double fx = f1(f, x);
      for (double s : {r, r / 4, r / 16}) {
        const double t = s / nv;
        best = std::max(best, (f1(f, add(x, scale(v, t))) - fx) / t);
      }
    }
    out.per_rung.push_back(best);
  }
  out.value = out.per_rung.back();
  return out;
}

JacobianEstimate clarke_jacobian(const SmoothSampler& f, const Vec& xbar, const std::vector<double>& radii,
                                 int n_samples, unsigned long long seed) {
  if (static_cast<int>(xbar.size()) != f.n) fail(Errc::DimensionMismatch, "xbar dimension");
  if (radii.empty() || n_samples < 1) fail(Errc::InsufficientSamples, "empty sampling plan");
  check_dim(f.m * f.n);
  const double h = fd_step(xbar);
  JacobianEstimate J;
  std::optional<Region> prev;
  for (size_t k = 0; k < radii.size(); ++k) {
    std::mt19937_64 rng(seed * 7919ULL + k);
    std::uniform_real_distribution<double> U(-radii[k], radii[k]);
    std::vector<Vec> xs;
    std::vector<Matrix> grads;
    double lip = 0.0;
    for (int s = 0; s < n_samples; ++s) {
      Vec x = xbar;
      for (auto& c : x) c += U(rng);
      grads.push_back(fd_jacobian(f, x, h));
      xs.push_back(std::move(x));
      lip = std::max(lip, grads.back().cwiseAbs().maxCoeff());
    }
    std::vector<Vec> kept;
    int flagged = 0;
    for (int s = 0; s < n_samples; ++s) {
      if (!f.grad && flagged_nondiff(f, xs[s], h, lip)) {
        ++flagged;
        continue;
      }
      kept.push_back(flatten(grads[s]));
    }
    if (flagged > 0.9 * n_samples) fail(Errc::InsufficientSamples, "more than 90% of samples flagged non-differentiable");
    Region hull = hull_of(kept);
    if (prev) J.rung_moves.push_back(hausdorff(*prev, hull, std::nullopt));
    prev = hull;
    J.sample_radius = radii[k];
    J.sample_count = static_cast<int>(kept.size());
    J.flagged = flagged;
  }
  J.matrices.clear();
  for (const auto& v : prev->pieces.front().vertices()) J.matrices.push_back(unflatten(v, f.m, f.n));
  return J;
}

Region jacobian_region(const JacobianEstimate& J) {
  if (J.matrices.empty()) fail(Errc::EmptyRegion, "empty Jacobian estimate");
  std::vector<Vec> pts;
  for (const auto& A : J.matrices) pts.push_back(flatten(A));
  return Region::of(Polyhedron::from_v(static_cast<int>(pts.front().size()), pts));
}

HomogMap jacobian_T(const JacobianEstimate& J) {
  if (J.matrices.empty()) fail(Errc::EmptyRegion, "empty Jacobian estimate");
  return HomogMap::bundle(J.matrices);
}

MvtResult mvt_check(const SmoothSampler& f, const Vec& x1, const Vec& x2, int grid) {
  require_scalar(f);
  if (grid < 3) fail(Errc::InsufficientSamples, "segment grid too small");
  MvtResult out;
  const Vec d = sub(x2, x1);
  out.value = f1(f, x2) - f1(f, x1);
  const double spacing = norm(d) / (grid - 1);
  const double tol = 1e-6 * (1.0 + std::abs(out.value));
  double best_gap = std::numeric_limits<double>::infinity();
  // open segment only
  for (int k = 1; k < grid - 1; ++k) {
    const Vec u = add(x1, scale(d, static_cast<double>(k) / (grid - 1)));
    const JacobianEstimate J = clarke_jacobian(f, u, {spacing}, 24, static_cast<unsigned long long>(k));
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& A : J.matrices) {
      const double v = dot(flatten(A), d);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double gap = std::max({0.0, lo - out.value, out.value - hi});
    if (gap < best_gap) {
      best_gap = gap;
      out.u = u;
      out.lo = lo;
      out.hi = hi;
    }
    if (gap <= tol) {
      out.holds = true;
      return out;
    }
  }
  return out;
}

CovectorStrictResult covector_strict_check(const SmoothSampler& f, const Region& C, const Vec& xbar, const CertConfig& cfg) {
  require_scalar(f);
  if (C.pieces.size() != 1 || !C.bounded()) fail(Errc::HypothesisFailure, "C must be a single polytope");
  if (C.dim != f.n) fail(Errc::DimensionMismatch, "covector dimension");
  std::vector<Matrix> rows;
  for (const auto& v : C.pieces[0].vertices()) {
    Matrix r(1, f.n);
    for (int j = 0; j < f.n; ++j) r(0, j) = v[j];
    rows.push_back(r);
  }
  CovectorStrictResult out;
  out.strict = certify_single(f.f, target(HomogMap::bundle(rows)), xbar, true, cfg);
  const JacobianEstimate J = clarke_jacobian(f, xbar);
  for (const auto& A : J.matrices) out.excess = std::max(out.excess, dist_point_region(flatten(A), C));
  out.containment = out.excess <= 1e-3;
  return out;
}

}  // namespace tdiff
