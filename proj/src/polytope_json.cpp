#include "atmpc/polytope_json.hpp"

#include <cmath>

namespace atmpc {

namespace {

using json = nlohmann::json;

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vec(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

[[noreturn]] void bad(const std::string& what) {
  throw GeometryError(GeometryError::Kind::DimensionMismatch, "polytope json: " + what);
}

Vec read_vec(const json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) bad("expected an array of " + std::to_string(dim) + " numbers");
  Vec v(dim);
  for (int i = 0; i < dim; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) bad("expected a number");
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

}  // namespace

json polytope_to_json(const Polytope& p) {
  json j = {{"dim", p.dim()}};
  const HPolytope& h = p.hrep();
  json normals = json::array();
  for (int k = 0; k < h.size(); ++k) normals.push_back(vec(h.normals.row(k).transpose()));
  j["normals"] = normals;
  j["offsets"] = vec(h.offsets);
  json v = json::array();
  for (const auto& x : p.vertices()) v.push_back(vec(x));
  j["vertices"] = v;
  return j;
}

Polytope polytope_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.at("dim").is_number_integer()) bad("missing integer 'dim'");
  const int dim = j.at("dim").get<int>();
  if (dim < 0) bad("negative dim");
  if (j.contains("normals") || j.contains("offsets")) {
    if (!j.contains("normals") || !j.contains("offsets")) bad("normals and offsets go together");
    const json& a = j.at("normals");
    if (!a.is_array()) bad("normals must be an array of rows");
    const int rows = static_cast<int>(a.size());
    Mat A(rows, dim);
    for (int k = 0; k < rows; ++k) A.row(k) = read_vec(a[static_cast<std::size_t>(k)], dim).transpose();
    return Polytope::from_hrep(A, read_vec(j.at("offsets"), rows));
  }
  if (!j.contains("vertices") || !j.at("vertices").is_array()) bad("needs normals/offsets or vertices");
  std::vector<Vec> pts;
  for (const auto& q : j.at("vertices")) pts.push_back(read_vec(q, dim));
  if (pts.empty()) return Polytope::empty(dim);
  return Polytope::from_vrep(pts);
}

}  // namespace atmpc
