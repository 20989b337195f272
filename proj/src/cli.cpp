#include "tdiff/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "tdiff/gallery.hpp"

#ifndef TDIFF_GALLERY_DIR
#define TDIFF_GALLERY_DIR "gallery"
#endif

namespace tdiff::cli {

namespace {

using io::json;

const std::vector<std::string> kOps{"certify",          "modulus",   "coderiv", "mord",   "compose-chain",
                                    "compose-sum",      "regcover-harness",   "strictify", "clarke", "semicontinuity"};

[[noreturn]] void bad(const std::string& what) { fail(Errc::ParseError, what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::string str(const json& j, const char* key, const std::string& fallback = "") {
  if (!j.contains(key)) {
    if (fallback.empty()) bad(std::string("missing field '") + key + "'");
    return fallback;
  }
  if (!j.at(key).is_string()) bad(std::string("field '") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

Vec vec(const json& t, const char* key) { return io::vec_from(field(t, key)); }
std::optional<Vec> opt_vec(const json& t, const char* key) {
  if (!t.contains(key) || t.at(key).is_null()) return std::nullopt;
  return io::vec_from(t.at(key));
}
double dbl(const json& t, const char* key, double fallback) { return t.contains(key) ? io::to_double(t.at(key)) : fallback; }
bool flag(const json& t, const char* key) { return t.contains(key) && t.at(key).get<bool>(); }

void need_dim(const Vec& v, int dim, const std::string& what) {
  if (static_cast<int>(v.size()) != dim)
    fail(Errc::DimensionMismatch, what + " has dimension " + std::to_string(v.size()) + ", expected " + std::to_string(dim));
}

void need_map_dims(const HomogMap& T, int n, int m, const std::string& what) {
  if (T.dim_in != n || T.dim_out != m)
    fail(Errc::DimensionMismatch, what + " maps R^" + std::to_string(T.dim_in) + " to R^" + std::to_string(T.dim_out) +
                                      ", expected R^" + std::to_string(n) + " to R^" + std::to_string(m));
}

struct Ctx {
  io::MapTable maps;
  io::TMapTable tmaps;
};

// A verdict-free task (coderiv, plain modulus) leaves verdict empty.
struct Outcome {
  json record = json::object();
  std::optional<Verdict> verdict;
  std::optional<bool> agree;
};

Verdict worst(Verdict a, Verdict b) {
  if (a == Verdict::refuted || b == Verdict::refuted) return Verdict::refuted;
  if (a == Verdict::inconclusive || b == Verdict::inconclusive) return Verdict::inconclusive;
  return Verdict::verified_at_scale;
}

SVMap map_arg(const json& t, const char* key, const Ctx& c) { return io::map_from(field(t, key), c.maps); }
HomogMap tmap_arg(const json& t, const char* key, const Ctx& c) { return io::tmap_from(field(t, key), c.tmaps); }

Outcome op_certify(const json& t, const Ctx& c, const CertConfig& cfg) {
  const Notion nt = notion_from_name(str(t, "notion"));
  const Vec xbar = vec(t, "xbar");
  const auto ybar = opt_vec(t, "ybar");
  Certificate cert;
  if (nt == Notion::singleT || nt == Notion::singleStrictT) {
    int n = 0, m = 0;
    const Fn f = gallery::function_by_name(str(t, "function"), &n, &m);
    const HomogMap T = tmap_arg(t, "T", c);
    need_dim(xbar, n, "xbar");
    need_map_dims(T, n, m, "T");
    const Target tg = t.contains("inflate") ? target(inflate(T, dbl(t, "inflate", 0))) : target(T);
    cert = certify_single(f, tg, xbar, nt == Notion::singleStrictT, cfg);
    return {{{"certificate", io::to_json(cert)}}, cert.verdict, std::nullopt};
  }
  const SVMap S = map_arg(t, "map", c);
  need_dim(xbar, S.dim_in, "xbar");
  if (ybar) need_dim(*ybar, S.dim_out, "ybar");
  if (nt == Notion::calm || nt == Notion::aubin) {
    const double kappa = io::to_double(field(t, "kappa"));
    if (nt == Notion::calm) cert = certify_calm(S, kappa, xbar, ybar, cfg);
    else {
      if (!ybar) bad("aubin needs 'ybar'");
      cert = certify_aubin(S, kappa, xbar, *ybar, cfg);
    }
    return {{{"certificate", io::to_json(cert)}}, cert.verdict, std::nullopt};
  }
  const HomogMap T = tmap_arg(t, "T", c);
  const bool reversed = nt == Notion::metricRegular || nt == Notion::openCovering || nt == Notion::metricSubregular;
  if (reversed) need_map_dims(T, S.dim_out, S.dim_in, "T");
  else need_map_dims(T, S.dim_in, S.dim_out, "T");
  const bool pseudo = nt == Notion::pseudoOuterT || nt == Notion::pseudoInnerT || nt == Notion::pseudoT ||
                      nt == Notion::pseudoStrictT;
  if ((pseudo || reversed) && !ybar) bad(std::string(notion_name(nt)) + " needs 'ybar'");
  const Target tg = t.contains("inflate") ? target(inflate(T, dbl(t, "inflate", 0))) : target(T);
  if (reversed) {
    const RegInstance inst{S, {xbar, *ybar}, T, cfg, static_cast<int>(dbl(t, "set_A_extra", 0))};
    cert = nt == Notion::metricRegular ? certify_mr(inst) : nt == Notion::openCovering ? certify_oc(inst) : certify_msr(inst);
  } else if (pseudo) {
    cert = certify_pseudo(S, tg, xbar, *ybar, nt, cfg);
  } else {
    cert = certify_setvalued(S, tg, xbar, nt, cfg);
  }
  return {{{"certificate", io::to_json(cert)}}, cert.verdict, std::nullopt};
}

Outcome op_semicontinuity(const json& t, const Ctx& c, const CertConfig& cfg) {
  const SVMap S = map_arg(t, "map", c);
  const Vec xbar = vec(t, "xbar");
  need_dim(xbar, S.dim_in, "xbar");
  const Vec center = opt_vec(t, "ybar").value_or(Vec(S.dim_out, 0.0));
  need_dim(center, S.dim_out, "ybar");
  const auto r = semicontinuity_report(S, xbar, Ball{center, cfg.truncation.radius});
  auto wit = [](const std::optional<Vec>& v) { return v ? io::to_json(*v) : json(nullptr); };
  json rec{{"outer_holds", r.outer_holds},          {"inner_holds", r.inner_holds},
           {"outer_witness", wit(r.outer_witness)}, {"inner_witness", wit(r.inner_witness)},
           {"inner_witness_x", wit(r.inner_witness_x)}, {"radii", io::to_json(r.radii)}};
  return {rec, r.outer_holds && r.inner_holds ? Verdict::verified_at_scale : Verdict::refuted, std::nullopt};
}

Outcome op_modulus(const json& t, const Ctx& c, const CertConfig& cfg) {
  const SVMap S = map_arg(t, "map", c);
  const Vec xbar = vec(t, "xbar");
  const auto ybar = opt_vec(t, "ybar");
  need_dim(xbar, S.dim_in, "xbar");
  if (ybar) need_dim(*ybar, S.dim_out, "ybar");
  const std::string kind = str(t, "kind", "lip");
  if (kind != "clm" && kind != "lip") bad("modulus kind must be 'clm' or 'lip'");
  const Modulus m = kind == "clm" ? estimate_clm(S, xbar, ybar, cfg) : estimate_lip(S, xbar, ybar, cfg);
  Outcome out{{{"modulus", io::to_json(m)}}, std::nullopt, std::nullopt};
  if (t.contains("expect_value")) {
    const double want = io::to_double(t.at("expect_value"));
    const double tol = dbl(t, "rel_tol", 0.05) * std::max(1.0, std::abs(want));
    const bool ok = std::isinf(want) ? m.value == want : std::abs(m.value - want) <= tol;
    out.record["expect_value"] = io::num(want);
    out.record["tolerance"] = io::num(tol);
    out.verdict = ok ? Verdict::verified_at_scale : Verdict::refuted;
  }
  return out;
}

json coderiv_json(const Coderivative& D) {
  json cones = json::array();
  for (const auto& p : D.graph_cones.pieces) {
    json rays = json::array();
    for (const auto& r : p.rays()) rays.push_back(io::to_json(r));
    cones.push_back(rays);
  }
  json cov = json::array();
  for (const auto& v : kappa_covectors(D)) cov.push_back(io::to_json(v));
  return {{"normal_cone_rays", cones},
          {"criterion", criterion_holds(D)},
          {"graphical_modulus", io::num(graphical_modulus(D))},
          {"kappa_covectors", cov}};
}

Outcome op_coderiv(const json& t, const Ctx& c, const CertConfig&) {
  const SVMap S = map_arg(t, "map", c);
  const Vec xbar = vec(t, "xbar"), ybar = vec(t, "ybar");
  need_dim(xbar, S.dim_in, "xbar");
  need_dim(ybar, S.dim_out, "ybar");
  const Coderivative D = coderivative(S, xbar, ybar);
  json rec = coderiv_json(D);
  if (t.contains("z")) {
    json vals = json::array();
    for (const auto& zj : t.at("z")) {
      const Vec z = io::vec_from(zj);
      need_dim(z, S.dim_out, "z");
      vals.push_back({{"z", io::to_json(z)}, {"value", io::to_json(coderiv_apply(D, z))}});
    }
    rec["values"] = vals;
  }
  return {rec, std::nullopt, std::nullopt};
}

Outcome op_mord(const json& t, const Ctx& c, const CertConfig& cfg) {
  const SVMap S = map_arg(t, "map", c);
  const Vec xbar = vec(t, "xbar"), ybar = vec(t, "ybar");
  need_dim(xbar, S.dim_in, "xbar");
  need_dim(ybar, S.dim_out, "ybar");
  const Coderivative D = coderivative(S, xbar, ybar);
  json rec = coderiv_json(D);
  // a failed criterion rules out the Aubin property, so the directional map does not exist
  if (!criterion_holds(D)) return {rec, Verdict::refuted, std::nullopt};
  const HomogMap T = mord_T(D);
  const double gm = graphical_modulus(D);
  const Modulus lip = estimate_lip(S, xbar, ybar, cfg);
  const Certificate cert = certify_pseudo(S, target(T), xbar, ybar, Notion::pseudoStrictT, cfg);
  rec["T"] = io::to_json(T);
  rec["lip_estimate"] = io::to_json(lip);
  rec["relative_gap"] = io::num(gm > 0 ? std::abs(gm - lip.value) / gm : std::abs(lip.value));
  rec["certificate"] = io::to_json(cert);
  return {rec, cert.verdict, std::nullopt};
}

// Certifies the calculus output on the combined graph, pseudo outer and optionally pseudo strict.
Outcome certify_calculus(const SVMap& combined, const HomogMap& T, const Vec& xbar, const Vec& ybar,
                         const HypothesisReport& rep, bool strict, const CertConfig& cfg) {
  const Target tg = target(inflate(T, cfg.delta_ladder.back()));
  const Certificate outer = certify_pseudo(combined, tg, xbar, ybar, Notion::pseudoOuterT, cfg);
  json rec{{"T", io::to_json(T)}, {"hypotheses", io::to_json(rep)}, {"outer", io::to_json(outer)}};
  Verdict v = outer.verdict;
  if (strict) {
    const Certificate st = certify_pseudo(combined, tg, xbar, ybar, Notion::pseudoStrictT, cfg);
    rec["strict"] = io::to_json(st);
    v = worst(v, st.verdict);
  }
  return {rec, v, std::nullopt};
}

Outcome op_chain(const json& t, const Ctx& c, const CertConfig& cfg) {
  ChainInstance inst;
  inst.F = map_arg(t, "F", c);
  inst.G = map_arg(t, "G", c);
  if (inst.F.dim_out != inst.G.dim_in) fail(Errc::DimensionMismatch, "F lands in R^" + std::to_string(inst.F.dim_out) +
                                                                       " but G starts from R^" + std::to_string(inst.G.dim_in));
  inst.xbar = vec(t, "xbar");
  inst.zbar = vec(t, "zbar");
  need_dim(inst.xbar, inst.F.dim_in, "xbar");
  need_dim(inst.zbar, inst.G.dim_out, "zbar");
  inst.resolution = dbl(t, "resolution", inst.resolution);
  for (const auto& p : field(t, "net")) {
    ChainNetPoint q{io::vec_from(field(p, "y")), io::tmap_from(field(p, "TF"), c.tmaps), io::tmap_from(field(p, "TG"), c.tmaps)};
    need_dim(q.y, inst.F.dim_out, "net point y");
    need_map_dims(q.TF, inst.F.dim_in, inst.F.dim_out, "TF");
    need_map_dims(q.TG, inst.G.dim_in, inst.G.dim_out, "TG");
    inst.net.push_back(q);
  }
  HypothesisReport rep;
  const HomogMap T = chain_T(inst, &rep);
  return certify_calculus(compose_graphs(inst.G, inst.F), T, inst.xbar, inst.zbar, rep, flag(t, "strict"), cfg);
}

Outcome op_sum(const json& t, const Ctx& c, const CertConfig& cfg) {
  std::vector<SVMap> Ss;
  for (const auto& m : field(t, "maps")) Ss.push_back(io::map_from(m, c.maps));
  if (Ss.empty()) bad("'maps' must be nonempty");
  const int n = Ss[0].dim_in, m = Ss[0].dim_out;
  for (const auto& S : Ss)
    if (S.dim_in != n || S.dim_out != m) fail(Errc::DimensionMismatch, "summands differ in dimensions");
  const Vec xbar = vec(t, "xbar"), ybar = vec(t, "ybar");
  need_dim(xbar, n, "xbar");
  need_dim(ybar, m, "ybar");
  std::vector<SumNetPoint> net;
  for (const auto& p : field(t, "net")) {
    SumNetPoint q;
    for (const auto& y : field(p, "ys")) q.ys.push_back(io::vec_from(y));
    for (const auto& T : field(p, "Ts")) q.Ts.push_back(io::tmap_from(T, c.tmaps));
    if (q.ys.size() != Ss.size() || q.Ts.size() != Ss.size()) fail(Errc::DimensionMismatch, "net point needs one y and one T per summand");
    for (const auto& y : q.ys) need_dim(y, m, "net point y");
    for (const auto& T : q.Ts) need_map_dims(T, n, m, "net T");
    net.push_back(q);
  }
  HypothesisReport rep;
  const HomogMap T = sum_T(Ss, xbar, ybar, net, dbl(t, "resolution", 0.05), &rep);
  return certify_calculus(sum_graphs(Ss), T, xbar, ybar, rep, flag(t, "strict"), cfg);
}

Outcome op_regcover(const json& t, const Ctx& c, const CertConfig& cfg) {
  const SVMap S = map_arg(t, "map", c);
  const HomogMap T = tmap_arg(t, "T", c);
  const Vec xbar = vec(t, "xbar"), ybar = vec(t, "ybar");
  need_dim(xbar, S.dim_in, "xbar");
  need_dim(ybar, S.dim_out, "ybar");
  const std::string kind = str(t, "kind", "equivalence");
  const GraphPoint pt{xbar, ybar};
  if (kind == "equivalence") {
    need_map_dims(T, S.dim_out, S.dim_in, "T");
    const auto r = equivalence_harness(S, pt, T, cfg);
    return {io::to_json(r), r.it.verdict, r.agree};
  }
  if (kind == "subregularity") {
    need_map_dims(T, S.dim_out, S.dim_in, "T");
    const auto r = subreg_harness(S, pt, T, cfg);
    return {io::to_json(r), r.outer_it.verdict, r.agree};
  }
  if (kind == "alt_defs") {
    need_map_dims(T, S.dim_out, S.dim_in, "T");
    const auto r = alt_defs_check(S, pt, T, cfg);
    return {io::to_json(r), r.constrained.verdict, r.agree};
  }
  if (kind == "extended_strict") {
    need_map_dims(T, S.dim_in, S.dim_out, "T");
    const auto r = extended_strict_check(S, pt, T, cfg);
    json rec{{"local", io::to_json(r.local)}, {"extended", io::to_json(r.extended)}, {"agree", r.agree}};
    return {rec, r.local.verdict, r.agree};
  }
  bad("unknown harness kind '" + kind + "'");
}

Outcome op_strictify(const json& t, const Ctx& c, const CertConfig& cfg) {
  const SVMap S = map_arg(t, "map", c);
  const Vec xbar = vec(t, "xbar"), ybar = vec(t, "ybar");
  need_dim(xbar, S.dim_in, "xbar");
  need_dim(ybar, S.dim_out, "ybar");
  const std::string form = str(t, "form", "strict_from_outer");
  if (form == "lip_clm") {
    std::optional<double> radius;
    if (t.contains("net_radius")) radius = io::to_double(t.at("net_radius"));
    const auto r = lip_equals_limsup_clm(S, xbar, ybar, cfg, dbl(t, "rel_tol", 0.05), radius);
    const bool ok = r.one_sided && (r.equality || !r.inner_sc);
    return {io::to_json(r), ok ? Verdict::verified_at_scale : Verdict::refuted, std::nullopt};
  }
  if (form != "strict_from_outer") bad("unknown strictify form '" + form + "'");
  const HomogMap T = tmap_arg(t, "T", c);
  need_map_dims(T, S.dim_in, S.dim_out, "T");
  const std::string mode = str(t, "mode", "standard");
  if (mode != "standard" && mode != "exclude_base") bad("unknown probe mode '" + mode + "'");
  const auto r = strict_from_outer(S, T, xbar, ybar, cfg, {}, mode == "standard" ? ProbeMode::Standard : ProbeMode::ExcludeBase);
  return {io::to_json(r), r.result.verdict, std::nullopt};
}

Outcome op_clarke(const json& t, const Ctx&, const CertConfig& cfg) {
  int n = 0, m = 0;
  const std::string name = str(t, "function");
  const Fn f = gallery::function_by_name(name, &n, &m);
  const Vec xbar = vec(t, "xbar");
  need_dim(xbar, n, "xbar");
  const SmoothSampler s{f, n, m, std::nullopt};
  const JacobianEstimate J = clarke_jacobian(s, xbar, {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}, 200, cfg.seed);
  json rec{{"jacobian", io::to_json(J)}};
  Verdict v = Verdict::verified_at_scale;
  if (t.contains("directions")) {
    if (m != 1) fail(Errc::NotScalar, "directional derivatives need a scalar function");
    json dd = json::array();
    for (const auto& dj : t.at("directions")) {
      const Vec d = io::vec_from(dj);
      need_dim(d, n, "direction");
      dd.push_back({{"v", io::to_json(d)}, {"derivative", io::to_json(clarke_dirderiv(s, xbar, d))}});
    }
    rec["directional"] = dd;
  }
  if (t.contains("expect_hull")) {
    // hull given as covectors (row-major Jacobians); Hausdorff distance against the estimate
    std::vector<Vec> pts;
    for (const auto& p : t.at("expect_hull")) {
      pts.push_back(io::vec_from(p));
      need_dim(pts.back(), n * m, "hull point");
    }
    const Region want = Region::of(Polyhedron::from_v(n * m, pts));
    const double h = hausdorff(jacobian_region(J), want, std::nullopt);
    const double tol = dbl(t, "hull_tol", 1e-2);
    rec["hull_distance"] = io::num(h);
    rec["hull_tol"] = io::num(tol);
    if (!(h <= tol)) v = Verdict::refuted;
  }
  const Certificate cert = certify_single(f, target(jacobian_T(J)), xbar, flag(t, "strict"), cfg);
  rec["certificate"] = io::to_json(cert);
  return {rec, worst(v, cert.verdict), std::nullopt};
}

Outcome dispatch(const std::string& op, const json& t, const Ctx& c, const CertConfig& cfg) {
  if (op == "certify") return op_certify(t, c, cfg);
  if (op == "semicontinuity") return op_semicontinuity(t, c, cfg);
  if (op == "modulus") return op_modulus(t, c, cfg);
  if (op == "coderiv") return op_coderiv(t, c, cfg);
  if (op == "mord") return op_mord(t, c, cfg);
  if (op == "compose-chain") return op_chain(t, c, cfg);
  if (op == "compose-sum") return op_sum(t, c, cfg);
  if (op == "regcover-harness") return op_regcover(t, c, cfg);
  if (op == "strictify") return op_strictify(t, c, cfg);
  if (op == "clarke") return op_clarke(t, c, cfg);
  fail(Errc::UnknownName, "unknown op '" + op + "'");
}

std::string short_verdict(Verdict v) { return v == Verdict::verified_at_scale ? "verified" : verdict_name(v); }

// Error text without the leading "Code: " that Error adds.
std::string bare(const Error& e) {
  const std::string w = e.what();
  const auto k = w.find(": ");
  return k == std::string::npos ? w : w.substr(k + 2);
}

// Resolves named definitions in any order; a name may refer to another definition of the same table.
template <class Table, class Build>
void resolve(const json& defs, const char* what, Table& table, Build build) {
  if (defs.is_null()) return;
  if (!defs.is_object()) bad(std::string("'") + what + "' must be an object");
  std::set<std::string> pending;
  for (const auto& [k, v] : defs.items()) pending.insert(k);
  while (!pending.empty()) {
    bool progress = false;
    std::string last;
    for (const auto& name : std::set<std::string>(pending)) {
      try {
        table.insert_or_assign(name, build(defs.at(name), table));
        pending.erase(name);
        progress = true;
      } catch (const Error& e) {
        if (e.code() != Errc::UnknownName) fail(e.code(), std::string(what) + " '" + name + "': " + bare(e));
        last = std::string(what) + " '" + name + "': " + bare(e);
      } catch (const json::exception& e) {
        bad(std::string(what) + " '" + name + "': " + e.what());
      }
    }
    if (!progress) fail(Errc::UnknownName, last);
  }
}

json tol_json(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) bad("--tol expects key=value, got '" + kv + "'");
  const std::string key = kv.substr(0, eq);
  std::vector<double> vals;
  std::stringstream ss(kv.substr(eq + 1));
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      bad("--tol value '" + tok + "' for '" + key + "' is not a number");
    }
  }
  if (vals.empty()) bad("--tol '" + key + "' has no value");
  const bool ladder = key.find("ladder") != std::string::npos;
  if (!ladder && vals.size() != 1) bad("--tol '" + key + "' takes a single value");
  return json{{key, ladder ? json(vals) : json(vals[0])}};
}

CertConfig apply_flags(CertConfig c, const Options& opt) {
  for (const auto& kv : opt.tol) c = io::config_from(tol_json(kv), c);
  if (opt.seed) c.seed = *opt.seed;
  if (opt.truncation) c.truncation.radius = *opt.truncation;
  c.jobs = std::max(1, opt.jobs);
  return c;
}

std::string where(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte > 0 ? byte - 1 : 0, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json header() { return {{"tool", kToolName}, {"version", kToolVersion}, {"schema_version", kSchemaVersion}}; }

RunResult error_result(const std::string& msg) {
  json r = header();
  r["error"] = msg;
  r["exit_code"] = 1;
  return {1, r};
}

// Status of one task and the exit code it forces.
std::pair<std::string, int> classify(const Outcome& o, const std::optional<std::string>& expect) {
  if (o.agree && !*o.agree) return {"disagree", 2};
  if (!o.verdict) {
    if (expect) return {"unexpected_" + *expect + "_missing", 2};
    return {"ok", 0};
  }
  const std::string got = short_verdict(*o.verdict);
  if (expect) {
    if (*expect != got) return {"unexpected_" + got, 2};
    return {got == "verified" ? "verified" : "expected_" + (got == "refuted" ? std::string("refutation") : got), 0};
  }
  return {got, got == "verified" ? 0 : 2};
}

}  // namespace

RunResult run_text(const std::string& text, const std::string& op_filter, const Options& opt) {
  json inst;
  try {
    inst = json::parse(text);
  } catch (const json::parse_error& e) {
    return error_result(std::string("ParseError at ") + where(text, e.byte) + ": " + e.what());
  }
  json report = header();
  Ctx ctx;
  CertConfig base;
  try {
    if (!inst.is_object()) bad("instance must be a JSON object");
    if (!inst.contains("version") || inst.at("version") != kSchemaVersion)
      bad("unsupported instance version, expected " + std::to_string(kSchemaVersion));
    base = apply_flags(io::config_from(inst.value("config", json()), CertConfig{}), opt);
    base.validate();
    resolve(inst.value("maps", json()), "map", ctx.maps, [](const json& d, const io::MapTable& t) { return io::map_from(d, t); });
    resolve(inst.value("tmaps", json()), "tmap", ctx.tmaps,
            [](const json& d, const io::TMapTable& t) { return io::tmap_from(d, t); });
    if (!inst.contains("tasks") || !inst.at("tasks").is_array()) bad("'tasks' must be an array");
  } catch (const std::exception& e) {
    return error_result(e.what());
  }
  report["instance"] = inst.value("name", std::string("unnamed"));
  report["instance_hash"] = io::content_hash(inst);
  report["seed"] = base.seed;
  report["config"] = io::to_json(base);

  int exit_code = 0;
  json tasks = json::array();
  std::map<std::string, int> counts;
  int index = 0;
  for (const auto& t : inst.at("tasks")) {
    const std::string id = t.is_object() && t.contains("id") && t.at("id").is_string() ? t.at("id").get<std::string>()
                                                                                       : "task" + std::to_string(index);
    ++index;
    json rec{{"id", id}};
    std::string op;
    std::optional<std::string> expect;
    int code = 0;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      op = str(t, "op");
      if (std::find(kOps.begin(), kOps.end(), op) == kOps.end()) fail(Errc::UnknownName, "unknown op '" + op + "'");
      if (!op_filter.empty() && op_filter != "run" && op != op_filter) continue;
      rec["op"] = op;
      if (t.contains("expect")) {
        expect = str(t, "expect");
        static const std::set<std::string> ok{"verified", "refuted", "inconclusive", "error"};
        if (!ok.count(*expect)) bad("expect must be verified, refuted, inconclusive or error");
        rec["expect"] = *expect;
      }
      CertConfig cfg = base;
      if (t.contains("config")) {
        cfg = apply_flags(io::config_from(t.at("config"), base), opt);
        cfg.validate();
        rec["config"] = io::to_json(cfg);
      }
      const Outcome o = dispatch(op, t, ctx, cfg);
      if (expect == std::optional<std::string>("error")) {
        rec["status"] = "unexpected_success";
        code = 2;
      } else {
        auto [status, c] = classify(o, expect);
        rec["status"] = status;
        code = c;
      }
      if (o.verdict) rec["verdict"] = short_verdict(*o.verdict);
      if (o.agree) rec["agree"] = *o.agree;
      rec["record"] = o.record;
    } catch (const std::exception& e) {
      if (rec.contains("op") || !op.empty()) rec["op"] = op;
      std::string code_name = "Error";
      if (const auto* te = dynamic_cast<const Error*>(&e)) code_name = errc_name(te->code());
      else if (dynamic_cast<const json::exception*>(&e)) code_name = "ParseError";
      rec["error"] = "task '" + id + "': " + e.what();
      rec["error_code"] = code_name;
      const std::string want_code = t.is_object() ? t.value("expect_error", std::string()) : std::string();
      if (expect == std::optional<std::string>("error") && (want_code.empty() || want_code == code_name)) {
        rec["status"] = "expected_error";
      } else {
        rec["status"] = "error";
        code = 1;
      }
    }
    if (opt.timing)
      rec["wall_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    ++counts[rec["status"].get<std::string>()];
    // errors dominate refutations
    if (code == 1 || exit_code == 1) exit_code = 1;
    else exit_code = std::max(exit_code, code);
    tasks.push_back(rec);
  }
  report["tasks"] = tasks;
  report["summary"] = counts;
  report["exit_code"] = exit_code;
  return {exit_code, report};
}

RunResult run_file(const std::string& path, const std::string& op_filter, const Options& opt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return error_result("cannot read instance file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  RunResult r = run_text(ss.str(), op_filter, opt);
  r.report["file"] = std::filesystem::path(path).filename().string();
  return r;
}

RunResult run_gallery(const std::string& dir, const Options& opt) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return error_result("gallery directory '" + dir + "' not found");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) return error_result("gallery directory '" + dir + "' has no instances");
  json out = header();
  json reports = json::array();
  int exit_code = 0;
  for (const auto& f : files) {
    RunResult r = run_file(f.string(), "run", opt);
    if (r.exit_code == 1 || exit_code == 1) exit_code = 1;
    else exit_code = std::max(exit_code, r.exit_code);
    reports.push_back(r.report);
  }
  out["gallery"] = reports;
  out["exit_code"] = exit_code;
  return {exit_code, out};
}

std::string render(const json& report) { return report.dump(2) + "\n"; }

int main(int argc, char** argv) {
  CLI::App app{"Certify T-differentiability, regularity and calculus rules for polyhedral set-valued maps"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  unsigned long long seed = 0;
  double truncation = 0;
  std::string json_out;
  auto* seed_opt = app.add_option("--seed", seed, "random seed (default 0)");
  app.add_option("--jobs", opt.jobs, "worker cap")->check(CLI::PositiveNumber);
  app.add_option("--tol", opt.tol, "config override key=value, lists comma separated");
  app.add_option("--json-out", json_out, "also write the report to this path");
  auto* trunc_opt = app.add_option("--truncation", truncation, "truncation radius R")->check(CLI::PositiveNumber);
  app.add_flag("--timing", opt.timing, "record wall times (reports stop being byte-identical)");

  std::string path;
  std::string gallery_dir = TDIFF_GALLERY_DIR;
  std::vector<std::string> ops = kOps;
  ops.erase(std::remove(ops.begin(), ops.end(), "semicontinuity"), ops.end());
  ops.push_back("run");
  for (const auto& op : ops) {
    auto* sub = app.add_subcommand(op, op == "run" ? "run every task of an instance" : "run the " + op + " tasks of an instance");
    sub->add_option("instance", path, "instance JSON file")->required();
  }
  auto* gal = app.add_subcommand("gallery", "run every instance of a gallery directory");
  gal->add_option("dir", gallery_dir, "gallery directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (*seed_opt) opt.seed = seed;
  if (*trunc_opt) opt.truncation = truncation;

  const auto* sub = app.get_subcommands().front();
  const RunResult r = sub->get_name() == "gallery" ? run_gallery(gallery_dir, opt) : run_file(path, sub->get_name(), opt);
  const std::string text = render(r.report);
  std::cout << text;
  if (!json_out.empty()) {
    std::ofstream out(json_out, std::ios::binary);
    out << text;
    if (!out) {
      std::cerr << "cannot write " << json_out << "\n";
      return 1;
    }
  }
  if (r.exit_code == 1 && r.report.contains("error")) std::cerr << r.report["error"].get<std::string>() << "\n";
  return r.exit_code;
}

}  // namespace tdiff::cli
