#pragma once

#include <vector>

#include "tdiff/homog.hpp"
#include "tdiff/svmap.hpp"

namespace tdiff {

struct NormalCone {
  Vec at;
  Polyhedron regular;  // intersection of the active-constraint cones of every piece through `at`
  Region general;      // union of regular cones over all cells of the local arrangement
};

// Exact for piecewise-polyhedral C; cones are returned at the origin.
NormalCone normal_cone(const Region& C, const Vec& xbar);

struct Coderivative {
  GraphPoint base;
  int n = 0, m = 0;
  Region graph_cones;  // general normal cone of gph S at (x̄, ȳ), coordinates (v, -z)
};

Coderivative coderivative(const SVMap& S, const Vec& xbar, const Vec& ybar);
// D*S(x̄|ȳ)(z) as a union of polyhedra in R^n.
Region coderiv_apply(const Coderivative& D, const Vec& z);

// D*S(x̄|ȳ)(0) = {0}.
bool criterion_holds(const Coderivative& D);

// max <-v, w> over v in D*S(x̄|ȳ)(B); +inf on an improving ray. For m >= 2 the ball is the
// circumscribed polytope, so the value is an upper estimate by ball_outer_factor(m).
double mord_kappa(const Coderivative& D, const Vec& w);

// kappa(w) = max_k <c_k, w>; the c_k come from the maximizing vertices of every cone slice.
std::vector<Vec> kappa_covectors(const Coderivative& D);

// w -> kappa(w) B^m as a cone graph; CriterionFails when D*S(x̄|ȳ)(0) != {0}.
HomogMap mord_T(const Coderivative& D);
// max_{|w| <= 1} kappa(w); +inf when the criterion fails.
double graphical_modulus(const Coderivative& D);

// One branch of a per-direction refinement: the map g S + f x, used on the directions in `cell`.
struct BranchTransform {
  Matrix g;         // m x m, invertible
  Matrix f;         // m x n
  Polyhedron cell;  // cone of directions in R^n
};

HomogMap precise_T(const SVMap& S, const Vec& xbar, const Vec& ybar, const std::vector<BranchTransform>& branches);

}  // namespace tdiff
