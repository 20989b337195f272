#pragma once

#include "tdiff/certify.hpp"

namespace tdiff {

// S: X => Y with a reversed-direction T: Y => X.
// Perturbations are singletons a with |a| <= r; W and r share the y ladder (r = 2 rW, so y and S(x)
// both stay in W). set_A_extra > 0 adds that many seeded companions to each {a} as a spot check.
struct RegInstance {
  SVMap S;
  GraphPoint point;
  HomogMap T;
  CertConfig cfg;
  int set_A_extra = 0;
};

// Literal forms: x ∈ S⁻¹(y) + (T+δ)(a) for MR, y ∈ S(x + (T+δ)(a)) for OC, with y = ȳ for MSR.
// Ladders: V (around x̄) from cfg.w_ladder, W and r (around ȳ) from cfg.radius_ladder, matching
// certify_pseudo on invert(S). Witness: x, x2 = target y, y = a.
Certificate certify_mr(const RegInstance& inst);
// Checked through the exact reformulation dist(x, S⁻¹(y) - T(a)) <= δ|a|.
Certificate certify_oc(const RegInstance& inst);
Certificate certify_msr(const RegInstance& inst);

struct EquivalenceRecord {
  Certificate mr, oc, it;
  bool agree = false;
};

// MR with T(-.), OC with -T(-.), and pseudo strict T-differentiability of S⁻¹ at ȳ for x̄.
EquivalenceRecord equivalence_harness(const SVMap& S, const GraphPoint& point, const HomogMap& T,
                                      const CertConfig& cfg);

struct SubregRecord {
  Certificate msr, outer_it;
  bool agree = false;
};

// MSR with T(-.) against pseudo outer T-differentiability of S⁻¹ at ȳ for x̄.
SubregRecord subreg_harness(const SVMap& S, const GraphPoint& point, const HomogMap& T, const CertConfig& cfg);

// T'(w) = T(t C) with t = gauge(C, w); C a polytope with 0 in its interior.
HomogMap ct_reduce(const Region& C, const HomogMap& T);

struct AltDefsRecord {
  Certificate constrained, unconstrained;
  bool agree = false;
};

// Requires 0 ∈ T(y) for every y; then MR with |a| <= r and with a unrestricted (inside the
// truncation ball around ȳ) must agree.
AltDefsRecord alt_defs_check(const SVMap& S, const GraphPoint& point, const HomogMap& T, const CertConfig& cfg);

struct ExtendedStrictRecord {
  Certificate local, extended;
  bool agree = false;
};

// Pseudo strict certification of S with the base point x' in V, and again with x' ranging over the
// truncation box around x̄ as well. Meaningful when T(w) ⊃ δ|w|B.
ExtendedStrictRecord extended_strict_check(const SVMap& S, const GraphPoint& point, const HomogMap& T,
                                           const CertConfig& cfg);

}  // namespace tdiff
