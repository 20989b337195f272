#pragma once

#include <map>
#include <string>

#include "tdiff/homog.hpp"
#include "tdiff/svmap.hpp"

namespace tdiff::gallery {

// S(x) = (-inf, x]; graph {y <= x}.
SVMap half_line();
// T(w) = {0} for w <= 0, [-w, w] for w >= 0.
HomogMap half_line_T();

// S(x1, x2) = {x1} x R.
SVMap column_map();
HomogMap column_T1();  // identity
HomogMap column_T2();  // (w1, w2) -> (w1, 0)

// Union of the square-root curve between 0 and x and the vertical ray above (x, sqrt|x|).
// The curve is a polyline uniform in s = sqrt|t| with step 2 sqrt(h), so chord error <= h.
SVMap sqrt_hook(double h = 1e-3);
// Graph {(w, 0, t) : t >= 0}.
HomogMap sqrt_hook_T();

SVMap whole_line();  // S(x) = R

SVMap ray_rotation();  // S(theta) = {t (cos theta, sin theta) : t >= 0}
SVMap sign_map();      // {sign x}, S(0) = {-1, 1}
SVMap cube_root();     // {x^(1/3)}

// T(w) = [-kappa |w|, inf).
HomogMap calm_below_T(double kappa);

struct NamedFn {
  std::string name;
  int n = 1;
  int m = 1;
  Fn f;
  Vec xbar;
};

// Locally Lipschitz functions used for the Clarke checks.
std::vector<NamedFn> clarke_corpus();
NamedFn wiggle();  // x^2 sin(x^-2), 0 at 0

// Oracle lookup by gallery id; params default per map.
SVMap oracle_by_name(const std::string& name, const std::map<std::string, double>& params = {});
Fn function_by_name(const std::string& name, int* n = nullptr, int* m = nullptr);

}  // namespace tdiff::gallery
