#pragma once

#include <string>
#include <vector>

#include "tdiff/homog.hpp"
#include "tdiff/svmap.hpp"

namespace tdiff {

// lip T(0) for a positively homogeneous T; +inf unless T(0) = {0} and T is Lipschitz near 0.
// Exact for bundles and ball maps; cone graphs use a pair sample of the unit ball.
double lip_at_zero(const HomogMap& T);

struct ChainNetPoint {
  Vec y;
  HomogMap TF;  // T_{x̄ -> y}
  HomogMap TG;  // T_{y -> z̄}
};

struct ChainInstance {
  SVMap F;  // X => Y
  SVMap G;  // Y => Z
  Vec xbar, zbar;
  std::vector<ChainNetPoint> net;
  double resolution = 0.05;  // every point of G^{-1}(z̄) ∩ F(x̄) lies this close to the net
};

struct HypothesisReport {
  double alpha = 0.0;  // sup outer norm of the inner maps
  double beta = 0.0;   // sup lip at 0 of the outer maps
  bool osc_holds = true;  // sampled, non-blocking
  std::vector<std::string> warnings;
};

// Throws HypothesisFailure naming the failed condition, CoverageGap when the net misses the set.
HypothesisReport check_chain(const ChainInstance& inst);
HomogMap chain_T(const ChainInstance& inst, HypothesisReport* report = nullptr);

HomogMap chain_single(const Fn& f, const Vec& xbar, const HomogMap& Tf, const SVMap& G, const HomogMap& TG,
                      const Vec& zbar);

struct SumNetPoint {
  std::vector<Vec> ys;        // y_1 + ... + y_p = ȳ
  std::vector<HomogMap> Ts;   // T^i_{x̄ -> y_i}
};

HomogMap sum_T(const std::vector<SVMap>& Ss, const Vec& xbar, const Vec& ybar, const std::vector<SumNetPoint>& net,
               double resolution = 0.05, HypothesisReport* report = nullptr);

}  // namespace tdiff
