#include "tdiff/gallery.hpp"

#include <algorithm>
#include <cmath>

namespace tdiff::gallery {

namespace {

double param(const std::map<std::string, double>& p, const std::string& key, double dflt) {
  auto it = p.find(key);
  return it == p.end() ? dflt : it->second;
}

Box interval(double lo, double hi) { return Box{{lo}, {hi}}; }

}  // namespace

SVMap half_line() {
  Region g(2);
  g.add(Polyhedron::from_h(2, {{{-1.0, 1.0}, 0.0}}));
  return SVMap::poly_graph(1, 1, g);
}

HomogMap half_line_T() {
  Region g(2);
  g.add(Polyhedron::from_v(2, {{0, 0}}, {{-1, 0}}));
  g.add(Polyhedron::from_v(2, {{0, 0}}, {{1, 1}, {1, -1}}));
  return HomogMap::cone(1, 1, g);
}

SVMap column_map() {
  // (x1, x2, y1, y2) with y1 = x1
  Region g(4);
  g.add(Polyhedron::from_h(4, {{{1, 0, -1, 0}, 0.0}, {{-1, 0, 1, 0}, 0.0}}));
  return SVMap::poly_graph(2, 2, g);
}

HomogMap column_T1() { return HomogMap::identity(2); }

HomogMap column_T2() {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 1.0;
  return HomogMap::linear(A);
}

SVMap sqrt_hook(double h) {
  auto fn = [](const Vec& x, double res) {
    const double s = x[0] >= 0 ? 1.0 : -1.0;
    const double top = std::sqrt(std::abs(x[0]));
    Region r(2);
    r.add(Polyhedron::from_v(2, {{x[0], top}}, {{0.0, 1.0}}));
    if (top > 0) {
      const double step = res > 0 ? 2.0 * std::sqrt(res) : top;
      const int k = std::max(1, static_cast<int>(std::ceil(top / step)));
      for (int i = 0; i < k; ++i) {
        const double u0 = top * i / k, u1 = top * (i + 1) / k;
        r.add(Polyhedron::segment({s * u0 * u0, u0}, {s * u1 * u1, u1}));
      }
    }
    return r;
  };
  return SVMap::oracle("sqrt_hook", 1, 2, fn, interval(-1.0, 1.0), h);
}

HomogMap sqrt_hook_T() {
  Region g(3);
  g.add(Polyhedron::from_v(3, {{0, 0, 0}}, {{1, 0, 0}, {-1, 0, 0}, {0, 0, 1}}));
  return HomogMap::cone(1, 2, g);
}

SVMap whole_line() {
  Region g(2);
  g.add(Polyhedron::whole(2));
  return SVMap::poly_graph(1, 1, g);
}

SVMap ray_rotation() {
  auto fn = [](const Vec& x, double) {
    return Region::of(Polyhedron::from_v(2, {{0.0, 0.0}}, {{std::cos(x[0]), std::sin(x[0])}}));
  };
  return SVMap::oracle("ray_rotation", 1, 2, fn, interval(-4.0, 4.0), 0.0);
}

SVMap sign_map() {
  auto fn = [](const Vec& x, double) {
    Region r(1);
    if (x[0] <= 0) r.add(Polyhedron::point({-1.0}));
    if (x[0] >= 0) r.add(Polyhedron::point({1.0}));
    return r;
  };
  return SVMap::oracle("sign_map", 1, 1, fn, interval(-1.0, 1.0), 0.0);
}

SVMap cube_root() {
  return from_function("cube_root", 1, 1, [](const Vec& x) { return Vec{std::cbrt(x[0])}; }, interval(-1.0, 1.0));
}

HomogMap calm_below_T(double kappa) {
  // {t >= -kappa |w|} is nonconvex for kappa > 0: one cone per sign of w
  Region g(2);
  g.add(Polyhedron::from_v(2, {{0, 0}}, {{1, -kappa}, {0, 1}}));
  g.add(Polyhedron::from_v(2, {{0, 0}}, {{-1, -kappa}, {0, 1}}));
  return HomogMap::cone(1, 1, g);
}

std::vector<NamedFn> clarke_corpus() {
  std::vector<NamedFn> out;
  out.push_back({"abs", 1, 1, [](const Vec& x) { return Vec{std::abs(x[0])}; }, {0.0}});
  out.push_back({"max2", 2, 1, [](const Vec& x) { return Vec{std::max(x[0], x[1])}; }, {0.0, 0.0}});
  out.push_back({"neg_abs", 1, 1, [](const Vec& x) { return Vec{-std::abs(x[0])}; }, {0.0}});
  out.push_back({"l1", 2, 1, [](const Vec& x) { return Vec{std::abs(x[0]) + std::abs(x[1])}; }, {0.0, 0.0}});
  out.push_back({"relu_shift", 1, 1, [](const Vec& x) { return Vec{std::max(0.0, x[0] - 0.5)}; }, {0.5}});
  out.push_back({"smooth", 2, 1, [](const Vec& x) { return Vec{std::sin(x[0]) + x[1] * x[1]}; }, {0.3, -0.2}});
  return out;
}

NamedFn wiggle() {
  return {"wiggle", 1, 1,
          [](const Vec& x) { return Vec{x[0] == 0.0 ? 0.0 : x[0] * x[0] * std::sin(1.0 / (x[0] * x[0]))}; },
          {0.0}};
}

Fn function_by_name(const std::string& name, int* n, int* m) {
  auto corpus = clarke_corpus();
  corpus.push_back(wiggle());
  corpus.push_back({"square", 1, 1, [](const Vec& x) { return Vec{x[0] * x[0]}; }, {1.0}});
  for (auto& c : corpus)
    if (c.name == name) {
      if (n) *n = c.n;
      if (m) *m = c.m;
      return c.f;
    }
  fail(Errc::UnknownName, "unknown gallery function '" + name + "'");
}

SVMap oracle_by_name(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "sqrt_hook") return sqrt_hook(param(params, "h", 1e-3));
  if (name == "ray_rotation") return ray_rotation();
  if (name == "sign_map") return sign_map();
  if (name == "cube_root") return cube_root();
  int n = 0, m = 0;
  Fn f = function_by_name(name, &n, &m);
  const double r = param(params, "box", 1.0);
  return from_function(name, n, m, f, Box{Vec(n, -r), Vec(n, r)});
}

}  // namespace tdiff::gallery
