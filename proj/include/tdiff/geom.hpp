#pragma once

#include <optional>
#include <vector>

#include "tdiff/error.hpp"

namespace tdiff {

using Vec = std::vector<double>;

// Single tolerance for every geometric predicate.
inline constexpr double kEps = 1e-9;
inline constexpr int kMaxDim = 4;
inline constexpr int kApproxLevel = 8;

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scale(const Vec& a, double k);
Vec concat(const Vec& a, const Vec& b);
Vec slice(const Vec& a, int from, int len);

// {z : <normal, z> <= offset}; normal is stored with unit length.
struct Halfspace {
  Vec normal;
  double offset = 0.0;
};

class Polyhedron {
 public:
  Polyhedron() = default;

  static Polyhedron from_h(int dim, std::vector<Halfspace> hs);
  static Polyhedron from_v(int dim, std::vector<Vec> verts, std::vector<Vec> rays = {});
  static Polyhedron point(const Vec& p);
  static Polyhedron segment(const Vec& a, const Vec& b);
  static Polyhedron box(const Vec& lo, const Vec& hi);
  static Polyhedron whole(int dim);
  static Polyhedron empty_set(int dim);
  // Trusted construction: caller guarantees the H- and V-representations agree.
  static Polyhedron from_parts(int dim, std::vector<Halfspace> hs, std::vector<Vec> verts,
                               std::vector<Vec> rays);

  int dim() const { return dim_; }
  const std::vector<Halfspace>& hrep() const { return h_; }
  const std::vector<Vec>& vertices() const { return v_; }
  const std::vector<Vec>& rays() const { return r_; }
  bool empty() const { return v_.empty(); }
  bool bounded() const { return r_.empty(); }
  bool contains(const Vec& p, double tol = kEps) const;

  // Intersection with extra halfspaces (H-rep concatenation).
  Polyhedron meet(const std::vector<Halfspace>& extra) const;
  Polyhedron meet(const Polyhedron& other) const { return meet(other.hrep()); }

  Polyhedron translate(const Vec& t) const;
  // Linear image under a coordinate permutation: new[i] = old[perm[i]].
  Polyhedron permute(const std::vector<int>& perm) const;
  Polyhedron negate() const;
  Polyhedron scaled(double k) const;  // k > 0

 private:
  int dim_ = 0;
  std::vector<Halfspace> h_;
  std::vector<Vec> v_;
  std::vector<Vec> r_;
};

struct Region {
  int dim = 0;
  std::vector<Polyhedron> pieces;

  Region() = default;
  explicit Region(int d) : dim(d) {}
  Region(int d, std::vector<Polyhedron> ps);
  static Region of(const Polyhedron& p) { return Region(p.dim(), {p}); }

  // Empty pieces are dropped on insertion.
  void add(const Polyhedron& p);
  bool empty() const { return pieces.empty(); }
  bool bounded() const;
  bool contains(const Vec& p, double tol = kEps) const;
};

struct Ball {
  Vec center;
  double radius = 0.0;
};

void check_dim(int dim);

// Euclidean projection onto a piece; returns +inf distance for an empty piece.
double dist_point_poly(const Vec& p, const Polyhedron& P, Vec* nearest = nullptr);
double dist_point_region(const Vec& p, const Region& R);
double hausdorff(const Region& C, const Region& D, const std::optional<Ball>& truncation);
Region minkowski_sum(const Region& A, const Region& B);
Polyhedron minkowski_sum(const Polyhedron& A, const Polyhedron& B);
double support(const Region& R, const Vec& u);
double gauge(const Region& C, const Vec& w);

// Circumscribed polytope of the Euclidean ball with 2*dim*level facets (exact interval in 1-D).
Polyhedron ball_outer(const Vec& center, double r, int level = kApproxLevel);
// Inscribed polytope: ball_outer shrunk by its over-approximation factor.
Polyhedron ball_inner(const Vec& center, double r, int level = kApproxLevel);
// max vertex norm of the unit circumscribed polytope (>= 1).
double ball_outer_factor(int dim, int level = kApproxLevel);

Polyhedron truncation_box(const Ball& b);
Region intersect(const Region& R, const Polyhedron& P);
Region truncate(const Region& R, const Ball& b);
Region translate(const Region& R, const Vec& t);

// Vertices plus interior points on every vertex pair segment; pieces must be bounded.
std::vector<Vec> sample_points(const Polyhedron& P, int per_segment = 4);
std::vector<Vec> sample_points(const Region& R, int per_segment = 4);

}  // namespace tdiff

namespace tdiff {

// Section of a graph piece in R^{n+m} at the first block x: {y : (x, y) in P}.
Polyhedron slice_at(const Polyhedron& P, const Vec& x);
Region slice_at(const Region& graph, const Vec& x);

// Pads halfspaces of a piece living on coordinates `coords` of R^dim.
std::vector<Halfspace> embed(const Polyhedron& P, int dim, const std::vector<int>& coords);

}  // namespace tdiff
