#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "tdiff/geom.hpp"

namespace tdiff {

using Matrix = Eigen::MatrixXd;

// Positively homogeneous map T: R^n => R^m.
//   ConeGraph:    graph is a union of polyhedral cones in R^{n+m}.
//   MatrixBundle: w -> {Aw : A in conv(mats)}.
//   BallMap:      w -> kappa |w| B, kept symbolic so distances stay exact.
struct HomogMap {
  enum class Kind { ConeGraph, MatrixBundle, BallMap };

  int dim_in = 0;
  int dim_out = 0;
  Kind kind = Kind::ConeGraph;
  Region graph;
  std::vector<Matrix> mats;
  double kappa = 0.0;

  static HomogMap cone(int n, int m, Region graph);
  static HomogMap bundle(std::vector<Matrix> mats);
  static HomogMap linear(const Matrix& A) { return bundle({A}); }
  static HomogMap ball(int n, int m, double kappa);
  static HomogMap zero(int n, int m) { return linear(Matrix::Zero(m, n)); }
  static HomogMap identity(int n) { return linear(Matrix::Identity(n, n)); }
};

// (T + delta_1 + ... + delta_k)(w) = T(w) + sum delta_i |w| B, each ball polyhedralized.
struct Inflation {
  HomogMap base;
  std::vector<double> deltas;
  double total() const;
};

Inflation inflate(const HomogMap& T, double delta);
Inflation inflate(const Inflation& I, double delta);

Region eval(const HomogMap& T, const Vec& w);
Region eval(const Inflation& I, const Vec& w);

// Exact Euclidean distance from y to A + T(w); +inf when T(w) is empty.
double dist_to_shift(const Vec& y, const Region& A, const HomogMap& T, const Vec& w);
// Same with A - T(w).
double dist_to_unshift(const Vec& y, const Region& A, const HomogMap& T, const Vec& w);

double outer_norm(const HomogMap& T);
HomogMap reflect(const HomogMap& T);
HomogMap to_cone(const HomogMap& T);
HomogMap compose(const HomogMap& T2, const HomogMap& T1);
HomogMap sum(const std::vector<HomogMap>& Ts);
HomogMap unite(const std::vector<HomogMap>& Ts);
// Pointwise intersection w -> T1(w) ∩ T2(w).
HomogMap meet(const HomogMap& T1, const HomogMap& T2);
HomogMap scale_input(const HomogMap& T, double k);  // w -> T(k w)

inline constexpr std::size_t kMaxPieces = 10000;

struct ContainsResult {
  bool holds = true;
  std::optional<Vec> witness;
};

// Unit directions: signed axes first, then a circle grid (n = 2) or seeded sphere samples.
std::vector<Vec> unit_directions(int dim, int count, unsigned long long seed = 0);
ContainsResult contains(const HomogMap& big, const HomogMap& small, int n_dirs);

// True when every sampled evaluation is a convex set, i.e. has a single piece up to merging.
bool convex_valued(const HomogMap& T, int n_dirs, std::optional<Vec>* witness = nullptr);

}  // namespace tdiff
