#pragma once

#include <optional>
#include <vector>

#include "tdiff/certify.hpp"

namespace tdiff {

using GradFn = std::function<Matrix(const Vec&)>;

struct SmoothSampler {
  Fn f;
  int n = 1;
  int m = 1;
  std::optional<GradFn> grad;  // analytic m x n Jacobian; finite differences otherwise
};

// Central-difference step h_fd = 1e-6 (1 + |x̄|).
double fd_step(const Vec& xbar);
Matrix fd_jacobian(const SmoothSampler& f, const Vec& x, double h);
// Forward and backward quotients disagree along some axis by more than 100 h L.
bool flagged_nondiff(const SmoothSampler& f, const Vec& x, double h, double lipschitz);

struct DirDeriv {
  double value = 0.0;            // max at the finest rung
  std::vector<double> ladder;
  std::vector<double> per_rung;  // max quotient per rung
};

DirDeriv clarke_dirderiv(const SmoothSampler& f, const Vec& xbar, const Vec& v,
                         const std::vector<double>& ladder = {1e-2, 1e-3, 1e-4, 1e-5});

struct JacobianEstimate {
  std::vector<Matrix> matrices;  // hull vertices
  double sample_radius = 0.0;
  int sample_count = 0;
  int flagged = 0;
  std::vector<double> rung_moves;  // hull Hausdorff move between consecutive rungs
};

JacobianEstimate clarke_jacobian(const SmoothSampler& f, const Vec& xbar,
                                 const std::vector<double>& radii = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}, int n_samples = 200,
                                 unsigned long long seed = 0);

// Hull of the estimate as a region in R^{m n} (row-major flattening).
Region jacobian_region(const JacobianEstimate& J);
HomogMap jacobian_T(const JacobianEstimate& J);

struct MvtResult {
  bool holds = false;
  Vec u;
  double value = 0.0;       // f(x2) - f(x1)
  double lo = 0.0, hi = 0.0;  // <subdifferential(u), x2 - x1>
};

MvtResult mvt_check(const SmoothSampler& f, const Vec& x1, const Vec& x2, int grid = 301);

struct CovectorStrictResult {
  Certificate strict;
  bool containment = false;
  double excess = 0.0;  // max distance of hull vertices from C
};

// C is a polytope of covectors; T(w) = {<v, w> : v in C}.
CovectorStrictResult covector_strict_check(const SmoothSampler& f, const Region& C, const Vec& xbar, const CertConfig& cfg);

}  // namespace tdiff
