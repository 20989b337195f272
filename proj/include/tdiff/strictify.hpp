#pragma once

#include <string>
#include <vector>

#include "tdiff/certify.hpp"

namespace tdiff {

// Standard: outer certificates on the whole net, base point included.
// ExcludeBase: the base point is dropped from the net and S must be outer semicontinuous at x̄;
// inner semicontinuity is still probed at x̄.
enum class ProbeMode { Standard, ExcludeBase };
const char* probe_mode_name(ProbeMode m);

// Graph points near (x̄, ȳ): x̄ itself and probe points at radius r and r/2, each with up to
// per_point samples of S(x) within r of ȳ. The base point comes first.
std::vector<GraphPoint> graph_net(const SVMap& S, const Vec& xbar, const Vec& ybar, double r, int per_point = 3);

struct HypothesisProbes {
  double outer_norm = 0.0;
  bool convex_values = true;
  bool domain_convex = true;
  bool inner_sc = true;
  bool outer_sc = true;  // probed in ExcludeBase mode only
  std::vector<std::string> notes;
};

struct StrictFromOuter {
  Certificate result;                   // measured pseudo strict certificate, inconclusive on mismatch
  Verdict predicted = Verdict::inconclusive;
  Verdict measured = Verdict::inconclusive;
  std::vector<GraphPoint> net;
  std::vector<Certificate> net_certs;   // pseudo outer T-certificates with the delta ladder as inflation
  HypothesisProbes probes;
  ProbeMode mode = ProbeMode::Standard;
};

// Throws HypothesisFailure for an infinite outer norm, a nonconvex value of T, a refuted net
// certificate, a failed inner semicontinuity probe, or (ExcludeBase) a failed outer probe.
// An empty net is replaced by graph_net at the first radius of the ladder, halved.
StrictFromOuter strict_from_outer(const SVMap& S, const HomogMap& T, const Vec& xbar, const Vec& ybar,
                                  const CertConfig& cfg, std::vector<GraphPoint> net = {},
                                  ProbeMode mode = ProbeMode::Standard);

struct LipClmRecord {
  double lip_est = 0.0;
  double clm_sup_est = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;
  double net_radius = 0.0;
  std::size_t net_size = 0;
  bool inner_sc = true;
  bool one_sided = true;  // gap >= -tolerance
  bool equality = true;   // |gap| <= tolerance; only implied when inner_sc holds
};

// lip S(x̄|ȳ) against the sup of clm S(x|y) over a graph net without (x̄, ȳ).
// The net radius defaults to the finest radius of the ladder; tolerance is rel_tol max(1, lip_est).
LipClmRecord lip_equals_limsup_clm(const SVMap& S, const Vec& xbar, const Vec& ybar, const CertConfig& cfg,
                                   double rel_tol = 0.05, std::optional<double> net_radius = std::nullopt);

}  // namespace tdiff
