#include "tdiff/io.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "tdiff/gallery.hpp"

namespace tdiff::io {

namespace {

[[noreturn]] void bad(const std::string& what) { fail(Errc::ParseError, what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

int int_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_integer()) bad(std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

json opt(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

json witness_json(const Witness& w) {
  return {{"x", to_json(w.x)},          {"x2", to_json(w.x2)},   {"y", to_json(w.y)},
          {"dist", num(w.dist)},        {"slack", num(w.slack)}, {"delta", num(w.delta)},
          {"violation", num(w.violation())}};
}

std::map<std::string, double> params_from(const json& j) {
  std::map<std::string, double> out;
  if (!j.contains("params")) return out;
  for (const auto& [k, v] : j.at("params").items()) out[k] = to_double(v);
  return out;
}

std::optional<Box> box_from(const json& j) {
  if (!j.contains("domain")) return std::nullopt;
  const json& d = j.at("domain");
  return Box{vec_from(field(d, "lo")), vec_from(field(d, "hi"))};
}

}  // namespace

json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double to_double(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  bad("expected a number, got " + j.dump());
}

json to_json(const Vec& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

Vec vec_from(const json& j) {
  if (!j.is_array()) bad("expected an array of numbers, got " + j.dump());
  Vec v;
  for (const auto& x : j) v.push_back(to_double(x));
  return v;
}

json to_json(const Matrix& A) {
  json rows = json::array();
  for (int i = 0; i < A.rows(); ++i) {
    json r = json::array();
    for (int k = 0; k < A.cols(); ++k) r.push_back(num(A(i, k)));
    rows.push_back(r);
  }
  return rows;
}

Matrix matrix_from(const json& j) {
  if (!j.is_array() || j.empty()) bad("expected a nonempty array of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(vec_from(j[0]).size());
  Matrix A(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const Vec r = vec_from(j[i]);
    if (static_cast<int>(r.size()) != cols) bad("ragged matrix");
    for (int k = 0; k < cols; ++k) A(i, k) = r[k];
  }
  return A;
}

json to_json(const Polyhedron& P) {
  json vs = json::array(), rs = json::array();
  for (const auto& v : P.vertices()) vs.push_back(to_json(v));
  for (const auto& r : P.rays()) rs.push_back(to_json(r));
  return {{"v", {{"vertices", vs}, {"rays", rs}}}};
}

Polyhedron poly_from(const json& j, int dim) {
  if (j.contains("h")) {
    std::vector<Halfspace> hs;
    for (const auto& row : j.at("h")) {
      Vec r = vec_from(row);
      if (static_cast<int>(r.size()) != dim + 1) bad("halfspace row needs " + std::to_string(dim + 1) + " entries");
      const double b = r.back();
      r.pop_back();
      hs.push_back({r, b});
    }
    return Polyhedron::from_h(dim, hs);
  }
  if (j.contains("v")) {
    const json& v = j.at("v");
    std::vector<Vec> verts, rays;
    for (const auto& p : field(v, "vertices")) verts.push_back(vec_from(p));
    if (v.contains("rays"))
      for (const auto& r : v.at("rays")) rays.push_back(vec_from(r));
    for (const auto& p : verts)
      if (static_cast<int>(p.size()) != dim) bad("vertex of dimension " + std::to_string(p.size()) + ", expected " + std::to_string(dim));
    for (const auto& r : rays)
      if (static_cast<int>(r.size()) != dim) bad("ray of dimension " + std::to_string(r.size()) + ", expected " + std::to_string(dim));
    if (verts.empty()) bad("a V-representation needs at least one vertex");
    return Polyhedron::from_v(dim, verts, rays);
  }
  bad("polyhedron needs an 'h' or a 'v' field");
}

json to_json(const Region& R) {
  json ps = json::array();
  for (const auto& p : R.pieces) ps.push_back(to_json(p));
  return {{"dim", R.dim}, {"pieces", ps}};
}

Region region_from(const json& j, int dim) {
  const json& ps = j.is_array() ? j : field(j, "pieces");
  Region R(dim);
  for (const auto& p : ps) R.add(poly_from(p, dim));
  return R;
}

json to_json(const HomogMap& T) {
  json out{{"n", T.dim_in}, {"m", T.dim_out}};
  switch (T.kind) {
    case HomogMap::Kind::ConeGraph:
      out["kind"] = "cone_graph";
      out["pieces"] = to_json(T.graph)["pieces"];
      break;
    case HomogMap::Kind::MatrixBundle: {
      out["kind"] = "matrix_bundle";
      json ms = json::array();
      for (const auto& A : T.mats) ms.push_back(to_json(A));
      out["matrices"] = ms;
      break;
    }
    case HomogMap::Kind::BallMap:
      out["kind"] = "ball";
      out["kappa"] = num(T.kappa);
      break;
  }
  return out;
}

json to_json(const CertConfig& c) {
  return {{"delta_ladder", to_json(c.delta_ladder)},
          {"radius_ladder", to_json(c.radius_ladder)},
          {"w_ladder", to_json(c.w_ladder)},
          {"grid_per_axis", c.grid_per_axis},
          {"truncation", num(c.truncation.radius)},
          {"samples_per_segment", c.samples_per_segment},
          {"seed", c.seed},
          {"eps", num(c.eps)}};
}

CertConfig config_from(const json& j, CertConfig c) {
  if (j.is_null()) return c;
  if (!j.is_object()) bad("config must be an object");
  for (const auto& [k, v] : j.items()) {
    if (k == "delta_ladder") c.delta_ladder = vec_from(v);
    else if (k == "radius_ladder") c.radius_ladder = vec_from(v);
    else if (k == "w_ladder") c.w_ladder = vec_from(v);
    else if (k == "grid_per_axis") c.grid_per_axis = static_cast<int>(to_double(v));
    else if (k == "truncation") c.truncation.radius = to_double(v);
    else if (k == "samples_per_segment") c.samples_per_segment = static_cast<int>(to_double(v));
    else if (k == "seed") c.seed = static_cast<unsigned long long>(to_double(v));
    else if (k == "eps") c.eps = to_double(v);
    else bad("unknown config key '" + k + "'");
  }
  return c;
}

json to_json(const Certificate& c) {
  json acc_v = json::array(), acc_w = json::array();
  for (const auto& v : c.accepted_v) acc_v.push_back(opt(v));
  for (const auto& w : c.accepted_w) acc_w.push_back(opt(w));
  json out{{"notion", notion_name(c.notion)},
           {"verdict", verdict_name(c.verdict)},
           {"norm", c.norm},
           {"xbar", to_json(c.xbar)},
           {"resolution", num(c.resolution)},
           {"eps_term", num(c.eps_term)},
           {"inflation", num(c.inflation)},
           {"delta_ladder", to_json(c.config.delta_ladder)},
           {"accepted_v", acc_v},
           {"accepted_w", acc_w},
           {"worst_ratio", num(c.worst_ratio)},
           {"pairs_checked", c.pairs_checked}};
  out["ybar"] = c.ybar ? to_json(*c.ybar) : json(nullptr);
  out["witness"] = c.witness ? witness_json(*c.witness) : json(nullptr);
  if (!c.diagnostics.empty()) out["diagnostics"] = c.diagnostics;
  return out;
}

json to_json(const Modulus& m) {
  return {{"kind", modulus_kind_name(m.kind)},
          {"value", num(m.value)},
          {"radii", to_json(m.radii)},
          {"per_rung", to_json(m.per_rung)}};
}

json to_json(const HypothesisReport& r) {
  return {{"alpha", num(r.alpha)}, {"beta", num(r.beta)}, {"osc_holds", r.osc_holds}, {"warnings", r.warnings}};
}

json to_json(const EquivalenceRecord& r) {
  return {{"metric_regularity", to_json(r.mr)},
          {"open_covering", to_json(r.oc)},
          {"inverse_strict", to_json(r.it)},
          {"agree", r.agree}};
}

json to_json(const SubregRecord& r) {
  return {{"metric_subregularity", to_json(r.msr)}, {"inverse_outer", to_json(r.outer_it)}, {"agree", r.agree}};
}

json to_json(const AltDefsRecord& r) {
  return {{"constrained", to_json(r.constrained)}, {"unconstrained", to_json(r.unconstrained)}, {"agree", r.agree}};
}

json to_json(const StrictFromOuter& r) {
  json net = json::array(), certs = json::array();
  for (const auto& g : r.net) net.push_back({{"x", to_json(g.x)}, {"y", to_json(g.y)}});
  for (const auto& c : r.net_certs) certs.push_back(to_json(c));
  const auto& p = r.probes;
  return {{"mode", probe_mode_name(r.mode)},
          {"predicted", verdict_name(r.predicted)},
          {"measured", verdict_name(r.measured)},
          {"result", to_json(r.result)},
          {"net", net},
          {"net_certificates", certs},
          {"probes",
           {{"outer_norm", num(p.outer_norm)},
            {"convex_values", p.convex_values},
            {"domain_convex", p.domain_convex},
            {"inner_sc", p.inner_sc},
            {"outer_sc", p.outer_sc},
            {"notes", p.notes}}}};
}

json to_json(const LipClmRecord& r) {
  return {{"lip_est", num(r.lip_est)},     {"clm_sup_est", num(r.clm_sup_est)}, {"gap", num(r.gap)},
          {"tolerance", num(r.tolerance)}, {"net_radius", num(r.net_radius)},   {"net_size", r.net_size},
          {"inner_sc", r.inner_sc},        {"one_sided", r.one_sided},          {"equality", r.equality}};
}

json to_json(const JacobianEstimate& J) {
  json ms = json::array();
  for (const auto& A : J.matrices) ms.push_back(to_json(A));
  return {{"matrices", ms},
          {"sample_radius", num(J.sample_radius)},
          {"sample_count", J.sample_count},
          {"flagged", J.flagged},
          {"rung_moves", to_json(J.rung_moves)}};
}

json to_json(const DirDeriv& d) {
  return {{"value", num(d.value)}, {"ladder", to_json(d.ladder)}, {"per_rung", to_json(d.per_rung)}};
}

SVMap map_from(const json& j, const MapTable& named) {
  if (j.is_string()) {
    const auto it = named.find(j.get<std::string>());
    if (it == named.end()) fail(Errc::UnknownName, "unknown map '" + j.get<std::string>() + "'");
    return it->second;
  }
  const std::string backend = field(j, "backend").get<std::string>();
  if (backend == "poly_graph") {
    const int n = int_field(j, "n"), m = int_field(j, "m");
    check_dim(n + m);
    return SVMap::poly_graph(n, m, region_from(field(j, "pieces"), n + m), box_from(j));
  }
  if (backend == "oracle" || backend == "gallery") {
    const std::string name = field(j, "name").get<std::string>();
    if (name == "half_line") return gallery::half_line();
    if (name == "column_map") return gallery::column_map();
    if (name == "whole_line") return gallery::whole_line();
    return gallery::oracle_by_name(name, params_from(j));
  }
  if (backend == "invert") return invert(map_from(field(j, "of"), named));
  if (backend == "compose") return compose_graphs(map_from(field(j, "outer"), named), map_from(field(j, "inner"), named));
  if (backend == "sum") {
    std::vector<SVMap> parts;
    for (const auto& p : field(j, "of")) parts.push_back(map_from(p, named));
    return sum_graphs(parts);
  }
  bad("unknown map backend '" + backend + "'");
}

HomogMap tmap_from(const json& j, const TMapTable& named) {
  if (j.is_string()) {
    const auto it = named.find(j.get<std::string>());
    if (it == named.end()) fail(Errc::UnknownName, "unknown T-map '" + j.get<std::string>() + "'");
    return it->second;
  }
  const std::string kind = field(j, "kind").get<std::string>();
  auto list = [&](const char* key) {
    std::vector<HomogMap> out;
    for (const auto& p : field(j, key)) out.push_back(tmap_from(p, named));
    if (out.empty()) bad(std::string("field '") + key + "' must be nonempty");
    return out;
  };
  if (kind == "cone_graph") {
    const int n = int_field(j, "n"), m = int_field(j, "m");
    check_dim(n + m);
    return HomogMap::cone(n, m, region_from(field(j, "pieces"), n + m));
  }
  if (kind == "matrix_bundle") {
    std::vector<Matrix> ms;
    for (const auto& A : field(j, "matrices")) ms.push_back(matrix_from(A));
    if (ms.empty()) bad("matrix_bundle needs at least one matrix");
    for (const auto& A : ms)
      if (A.rows() != ms[0].rows() || A.cols() != ms[0].cols()) fail(Errc::DimensionMismatch, "bundle matrices differ in shape");
    return HomogMap::bundle(ms);
  }
  if (kind == "linear") return HomogMap::linear(matrix_from(field(j, "matrix")));
  if (kind == "ball") {
    const int n = j.contains("n") ? int_field(j, "n") : 1, m = j.contains("m") ? int_field(j, "m") : 1;
    return HomogMap::ball(n, m, to_double(field(j, "kappa")));
  }
  if (kind == "zero") return HomogMap::zero(int_field(j, "n"), int_field(j, "m"));
  if (kind == "identity") return HomogMap::identity(int_field(j, "n"));
  if (kind == "gallery") {
    const std::string name = field(j, "name").get<std::string>();
    if (name == "half_line_T") return gallery::half_line_T();
    if (name == "column_T1") return gallery::column_T1();
    if (name == "column_T2") return gallery::column_T2();
    if (name == "sqrt_hook_T") return gallery::sqrt_hook_T();
    if (name == "calm_below_T") return gallery::calm_below_T(to_double(field(j, "kappa")));
    fail(Errc::UnknownName, "unknown gallery T-map '" + name + "'");
  }
  if (kind == "reflect") return reflect(tmap_from(field(j, "of"), named));
  if (kind == "scale_input") return scale_input(tmap_from(field(j, "of"), named), to_double(field(j, "k")));
  if (kind == "meet") {
    const auto ts = list("of");
    if (ts.size() != 2) bad("meet takes exactly two maps");
    return meet(ts[0], ts[1]);
  }
  if (kind == "unite") return unite(list("of"));
  if (kind == "sum") return sum(list("of"));
  if (kind == "compose") return compose(tmap_from(field(j, "outer"), named), tmap_from(field(j, "inner"), named));
  if (kind == "ct_reduce") {
    const HomogMap T = tmap_from(field(j, "of"), named);
    return ct_reduce(Region::of(poly_from(field(j, "C"), T.dim_in)), T);
  }
  bad("unknown T-map kind '" + kind + "'");
}

std::string content_hash(const json& j) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tdiff::io
