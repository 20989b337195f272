#pragma once

#include <map>
#include <string>

#include "json.hpp"
#include "tdiff/calculus.hpp"
#include "tdiff/clarke.hpp"
#include "tdiff/coderiv.hpp"
#include "tdiff/regcover.hpp"
#include "tdiff/strictify.hpp"

namespace tdiff::io {

using json = nlohmann::json;

// Non-finite doubles are written as the strings "inf", "-inf", "nan" and read back the same way.
json num(double v);
double to_double(const json& j);

json to_json(const Vec& v);
Vec vec_from(const json& j);
json to_json(const Matrix& A);
Matrix matrix_from(const json& j);

// {"v": [...], "rays": [...]} or {"h": [[a_1, ..., a_d, b], ...]} meaning a.x <= b.
json to_json(const Polyhedron& P);
Polyhedron poly_from(const json& j, int dim);
json to_json(const Region& R);
Region region_from(const json& j, int dim);

json to_json(const HomogMap& T);
json to_json(const CertConfig& c);
// Keys absent from j keep their value in base.
CertConfig config_from(const json& j, CertConfig base);

json to_json(const Certificate& c);
json to_json(const Modulus& m);
json to_json(const HypothesisReport& r);
json to_json(const EquivalenceRecord& r);
json to_json(const SubregRecord& r);
json to_json(const AltDefsRecord& r);
json to_json(const StrictFromOuter& r);
json to_json(const LipClmRecord& r);
json to_json(const JacobianEstimate& J);
json to_json(const DirDeriv& d);

// Named definitions resolve through these tables; references are either a name or an inline object.
using MapTable = std::map<std::string, SVMap>;
using TMapTable = std::map<std::string, HomogMap>;
SVMap map_from(const json& j, const MapTable& named);
HomogMap tmap_from(const json& j, const TMapTable& named);

// FNV-1a over the compact dump, as 16 hex digits.
std::string content_hash(const json& j);

}  // namespace tdiff::io
