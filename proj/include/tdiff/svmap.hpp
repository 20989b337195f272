#pragma once

#include <functional>
#include <optional>
#include <string>

#include "tdiff/geom.hpp"

namespace tdiff {

struct Box {
  Vec lo, hi;
  bool contains(const Vec& x, double tol = kEps) const;
};

// Pure function of (x, resolution h).
using Evaluator = std::function<Region(const Vec& x, double h)>;

struct SVMap {
  enum class Backend { PolyGraph, Oracle };

  int dim_in = 0;
  int dim_out = 0;
  Backend backend = Backend::PolyGraph;
  Region graph;
  Evaluator fn;
  std::optional<Box> domain;
  double resolution = 0.0;  // h; 0 for exact graphs
  std::string name;

  static SVMap poly_graph(int n, int m, Region graph, std::optional<Box> domain = std::nullopt);
  static SVMap oracle(std::string name, int n, int m, Evaluator fn, Box domain, double h);
};

struct GraphPoint {
  Vec x, y;
};

Region eval(const SVMap& S, const Vec& x);
SVMap invert(const SVMap& S);
// Graph of G∘F for polyhedral F, G, lifted over the intermediate variable.
SVMap compose_graphs(const SVMap& G, const SVMap& F);
// Graph of x -> S1(x) + ... + Sp(x) for polyhedral maps.
SVMap sum_graphs(const std::vector<SVMap>& Ss);
bool on_graph(const SVMap& S, const GraphPoint& p, double tol = 1e-7);

struct LimitProbe {
  Region outer_est;  // point cloud of cluster values
  Region inner_est;
  std::vector<double> radii;
};

// Probe points at x̄ ± r e (signed axes, plus diagonals when n >= 2); x̄ itself excluded.
std::vector<Vec> probe_points(const Vec& xbar, double r);
LimitProbe limit_probe(const SVMap& S, const Vec& xbar, const std::vector<double>& radii, const Ball& truncation);

struct SemicontinuityReport {
  bool outer_holds = true;
  bool inner_holds = true;
  std::optional<Vec> outer_witness;     // cluster value outside S(x̄)
  std::optional<Vec> inner_witness;     // point of S(x̄) not reached
  std::optional<Vec> inner_witness_x;   // probe point where it is missed
  std::vector<double> radii;
};

SemicontinuityReport semicontinuity_report(const SVMap& S, const Vec& xbar, const Ball& truncation,
                                           const std::vector<double>& radii = {1e-1, 1e-2, 1e-3});

}  // namespace tdiff

namespace tdiff {

using Fn = std::function<Vec(const Vec&)>;

// Oracle whose value is the singleton {f(x)}.
SVMap from_function(std::string name, int n, int m, Fn f, Box domain);

}  // namespace tdiff
