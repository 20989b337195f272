#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tdiff/homog.hpp"
#include "tdiff/svmap.hpp"

namespace tdiff {

enum class Notion {
  outerT,
  innerT,
  T,
  strictT,
  pseudoOuterT,
  pseudoInnerT,
  pseudoT,
  pseudoStrictT,
  calm,
  aubin,
  singleT,
  singleStrictT,
  metricRegular,
  openCovering,
  metricSubregular,
};

enum class Verdict { verified_at_scale, refuted, inconclusive };

const char* notion_name(Notion n);
const char* verdict_name(Verdict v);
Notion notion_from_name(const std::string& s);

struct CertConfig {
  std::vector<double> delta_ladder{1e-1, 3e-2, 1e-2};
  std::vector<double> radius_ladder{0.2, 0.1, 0.05, 0.02, 0.01};
  // W radii for pseudo notions; the smallest must still see the structure near ȳ.
  std::vector<double> w_ladder{0.5, 0.2};
  int grid_per_axis = 21;
  // Center defaults to the origin when its dimension does not match.
  Ball truncation{{}, 3.0};
  int samples_per_segment = 4;
  unsigned long long seed = 0;
  int jobs = 1;
  double eps = kEps;

  void validate() const;
};

struct Witness {
  Vec x;      // point whose value forms the left side (x̄ for inner notions)
  Vec x2;     // base point of the right side
  Vec y;      // left-side point outside the right side
  double dist = 0.0;
  double slack = 0.0;
  double delta = 0.0;
  double violation() const { return dist - slack; }
};

struct Certificate {
  Notion notion = Notion::outerT;
  Verdict verdict = Verdict::inconclusive;
  std::optional<Witness> witness;
  CertConfig config;
  std::string norm = "euclidean";
  Vec xbar;
  std::optional<Vec> ybar;
  double resolution = 0.0;     // oracle h, part of the slack
  double eps_term = 0.0;       // 10 eps, part of the slack
  double inflation = 0.0;      // symbolic ball added to T, if any
  // Per delta: accepted V and W radii, absent when no rung passed.
  std::vector<std::optional<double>> accepted_v;
  std::vector<std::optional<double>> accepted_w;
  // Worst measured (dist - 10 eps - h)/|w| on the finest rung.
  double worst_ratio = 0.0;
  std::size_t pairs_checked = 0;
  std::string diagnostics;
};

// T with an exact Euclidean inflation w -> T(w) + extra |w| B.
struct Target {
  HomogMap T;
  double extra = 0.0;
};
Target target(const HomogMap& T);
Target target(const Inflation& I);

Certificate certify_single(const Fn& f, const Target& T, const Vec& xbar, bool strict, const CertConfig& cfg);
Certificate certify_setvalued(const SVMap& S, const Target& T, const Vec& xbar, Notion notion,
                              const CertConfig& cfg);
Certificate certify_pseudo(const SVMap& S, const Target& T, const Vec& xbar, const Vec& ybar, Notion notion,
                           const CertConfig& cfg);
// Calm: pseudo outer with kappa|.|B; Aubin: pseudo strict with kappa|.|B.
Certificate certify_calm(const SVMap& S, double kappa, const Vec& xbar, const std::optional<Vec>& ybar,
                         const CertConfig& cfg);
Certificate certify_aubin(const SVMap& S, double kappa, const Vec& xbar, const Vec& ybar, const CertConfig& cfg);

// Re-evaluates a refutation witness with the oracle resolution halved.
bool recheck_witness(const Certificate& c, const SVMap& S, const Target& T);

enum class ModulusKind { clm, lip, clm_at_for, lip_at_for };
const char* modulus_kind_name(ModulusKind k);

struct Modulus {
  double value = 0.0;  // +inf when the ladder trend diverges
  ModulusKind kind = ModulusKind::clm;
  std::vector<double> radii;
  std::vector<double> per_rung;  // sup ratio at each V radius
};

Modulus estimate_clm(const SVMap& S, const Vec& xbar, const std::optional<Vec>& ybar, const CertConfig& cfg);
Modulus estimate_lip(const SVMap& S, const Vec& xbar, const std::optional<Vec>& ybar, const CertConfig& cfg);

// Aggregates pseudo certificates over a net of ȳ in S(x̄) and re-verifies the plain notion.
Certificate globalize(const std::vector<Certificate>& pointwise, const SVMap& S, const Target& T, const Vec& xbar,
                      const CertConfig& cfg);

// Deterministic worker pool: fn(i) for i < count, results written by index.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

// Lattice of per_axis points per coordinate on [c - r, c + r] plus seeded jitter points per cell.
std::vector<Vec> neighborhood_grid(const Vec& center, double r, int per_axis, int jitter_per_cell,
                                   unsigned long long seed, const std::optional<Box>& domain);

}  // namespace tdiff
