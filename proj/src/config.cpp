#include "atmpc/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace atmpc {

using nlohmann::json;

namespace {

// Input iterator over a string that counts the newlines it has consumed.
class CountingIterator {
 public:
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  CountingIterator(const char* p, int* line) : p_(p), line_(line) {}
  reference operator*() const { return *p_; }
  CountingIterator& operator++() {
    if (*p_ == '\n') ++*line_;
    ++p_;
    return *this;
  }
  bool operator==(const CountingIterator& o) const { return p_ == o.p_; }
  bool operator!=(const CountingIterator& o) const { return p_ != o.p_; }

 private:
  const char* p_;
  int* line_;
};

// DOM builder that also records the line of every object key, by JSON pointer.
class LineSax {
 public:
  LineSax(json& root, const int* line) : dom_(root, true), line_(line) {}

  bool null() { return value() && dom_.null(); }
  bool boolean(bool v) { return value() && dom_.boolean(v); }
  bool number_integer(json::number_integer_t v) { return value() && dom_.number_integer(v); }
  bool number_unsigned(json::number_unsigned_t v) { return value() && dom_.number_unsigned(v); }
  bool number_float(json::number_float_t v, const std::string& s) { return value() && dom_.number_float(v, s); }
  bool string(json::string_t& v) { return value() && dom_.string(v); }
  bool binary(json::binary_t& v) { return value() && dom_.binary(v); }
  bool start_object(std::size_t n) {
    enter();
    frames_.push_back({true, "", 0});
    return dom_.start_object(n);
  }
  bool key(json::string_t& k) {
    frames_.back().key = k;
    lines[pointer()] = *line_ + 1;
    return dom_.key(k);
  }
  bool end_object() {
    frames_.pop_back();
    return dom_.end_object();
  }
  bool start_array(std::size_t n) {
    enter();
    frames_.push_back({false, "", 0});
    return dom_.start_array(n);
  }
  bool end_array() {
    frames_.pop_back();
    return dom_.end_array();
  }
  bool parse_error(std::size_t pos, const std::string& tok, const nlohmann::detail::exception& e) {
    return dom_.parse_error(pos, tok, e);
  }
  std::map<std::string, int> lines;

 private:
  struct Frame {
    bool object;
    std::string key;
    int index;
  };

  std::string pointer() const {
    std::string p;
    for (const auto& f : frames_) p += "/" + (f.object ? f.key : std::to_string(f.index - 1));
    return p;
  }
  void enter() {
    if (!frames_.empty() && !frames_.back().object) ++frames_.back().index;
  }
  bool value() {
    enter();
    return true;
  }

  nlohmann::detail::json_sax_dom_parser<json> dom_;
  std::vector<Frame> frames_;
  const int* line_;
};

// Eigen's operator== requires equal sizes.
bool same(const Mat& a, const Mat& b) { return a.rows() == b.rows() && a.cols() == b.cols() && a == b; }

bool same(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same(a[i], b[i])) return false;
  return true;
}

bool same(const std::vector<Mat>& a, const std::vector<Mat>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same(a[i], b[i])) return false;
  return true;
}

class Reader {
 public:
  Reader(std::string source, std::map<std::string, int> lines) : source_(std::move(source)), lines_(std::move(lines)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw ConfigError(source_, line_of(path), path.empty() ? "/" : path, what);
  }

  int line_of(std::string path) const {
    while (!path.empty()) {
      auto it = lines_.find(path);
      if (it != lines_.end()) return it->second;
      path = path.substr(0, path.rfind('/'));
    }
    return 1;
  }

  const json& object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) const {
    if (!j.is_object()) fail(path, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!ok.count(it.key())) fail(path + "/" + it.key(), "unknown key '" + it.key() + "'");
    return j;
  }

  const json& required(const json& j, const std::string& path, const char* key) const {
    if (!j.contains(key)) fail(path, std::string("missing required key '") + key + "'");
    return j.at(key);
  }

  double number(const json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
  }

  long long integer(const json& j, const std::string& path) const {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<long long>();
  }

  bool boolean(const json& j, const std::string& path) const {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
  }

  std::string string(const json& j, const std::string& path) const {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
  }

  Vec vector(const json& j, const std::string& path) const {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of numbers");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], path + "/" + std::to_string(i));
    return v;
  }

  Mat matrix(const json& j, const std::string& path) const {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
    std::vector<Vec> rows;
    for (std::size_t i = 0; i < j.size(); ++i) rows.push_back(vector(j[i], path + "/" + std::to_string(i)));
    Mat M(static_cast<Eigen::Index>(rows.size()), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != M.cols()) fail(path + "/" + std::to_string(i), "rows have different lengths");
      M.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    }
    return M;
  }

  PolytopeSpec polytope(const json& j, const std::string& path) const {
    object(j, path, {"lower", "upper", "A", "b", "vertices"});
    PolytopeSpec p;
    const bool box = j.contains("lower") || j.contains("upper");
    const bool hrep = j.contains("A") || j.contains("b");
    const bool vrep = j.contains("vertices");
    if (box + hrep + vrep != 1) fail(path, "give exactly one of {lower, upper}, {A, b} or {vertices}");
    if (box) {
      p.kind = PolytopeSpec::Kind::Box;
      p.lower = vector(required(j, path, "lower"), path + "/lower");
      p.upper = vector(required(j, path, "upper"), path + "/upper");
      if (p.lower.size() != p.upper.size()) fail(path, "lower and upper have different sizes");
      if ((p.lower.array() > p.upper.array()).any()) fail(path, "lower exceeds upper");
    } else if (hrep) {
      p.kind = PolytopeSpec::Kind::HRep;
      p.A = matrix(required(j, path, "A"), path + "/A");
      p.b = vector(required(j, path, "b"), path + "/b");
      if (p.b.size() != p.A.rows()) fail(path, "A and b have different row counts");
    } else {
      p.kind = PolytopeSpec::Kind::Vertices;
      const json& v = j.at("vertices");
      if (!v.is_array() || v.empty()) fail(path + "/vertices", "expected a non-empty array of points");
      for (std::size_t i = 0; i < v.size(); ++i) p.vertices.push_back(vector(v[i], path + "/vertices/" + std::to_string(i)));
      for (const auto& q : p.vertices)
        if (q.size() != p.vertices.front().size()) fail(path + "/vertices", "points have different sizes");
    }
    try {
      const Polytope built = p.build();
      if (built.is_empty()) fail(path, "polytope is empty");
    } catch (const GeometryError& e) {
      fail(path, e.what());
    }
    return p;
  }

 private:
  std::string source_;
  std::map<std::string, int> lines_;
};

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json to_json(const Mat& M) {
  json a = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) a.push_back(to_json(Vec(M.row(i).transpose())));
  return a;
}

json to_json(const PolytopeSpec& p) {
  json j = json::object();
  switch (p.kind) {
    case PolytopeSpec::Kind::Box:
      j["lower"] = to_json(p.lower);
      j["upper"] = to_json(p.upper);
      break;
    case PolytopeSpec::Kind::HRep:
      j["A"] = to_json(p.A);
      j["b"] = to_json(p.b);
      break;
    case PolytopeSpec::Kind::Vertices: {
      json v = json::array();
      for (const auto& q : p.vertices) v.push_back(to_json(q));
      j["vertices"] = v;
      break;
    }
  }
  return j;
}

// Config path of each PlantConfig field named by InvalidConfig.
std::string field_path(const std::string& field) {
  static const std::map<std::string, std::string> paths = {
      {"A_true", "/plant/A_true"},           {"B_true", "/plant/B_true"},
      {"X", "/constraints/X"},               {"U", "/constraints/U"},
      {"D", "/constraints/D"},               {"D_true", "/plant/D_true"},               {"psi_vertices", "/uncertainty/psi_vertices"},
      {"psi_hat0", "/uncertainty/psi_hat0"}, {"L_max", "/uncertainty/L_max"},
      {"kappa", "/controller/kappa"},        {"N", "/controller/N"},
      {"Q", "/controller/Q"},                {"R", "/controller/R"},
      {"x0", "/run/x0"},                     {"T_steps", "/run/T_steps"},
  };
  auto it = paths.find(field);
  return it == paths.end() ? "" : it->second;
}

}  // namespace

Polytope PolytopeSpec::build() const {
  switch (kind) {
    case Kind::Box: return Polytope::box(lower, upper);
    case Kind::HRep: return Polytope::from_hrep(A, b);
    case Kind::Vertices: return Polytope::from_vrep(vertices);
  }
  return {};
}

PolytopeSpec PolytopeSpec::box(const Vec& lower, const Vec& upper) {
  PolytopeSpec p;
  p.kind = Kind::Box;
  p.lower = lower;
  p.upper = upper;
  return p;
}

bool PolytopeSpec::operator==(const PolytopeSpec& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Box: return same(lower, o.lower) && same(upper, o.upper);
    case Kind::HRep: return same(A, o.A) && same(b, o.b);
    case Kind::Vertices: return same(vertices, o.vertices);
  }
  return false;
}

ConfigError::ConfigError(const std::string& source, int line, const std::string& path, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + path + ": " + what), line_(line), path_(path) {}

Mat ExperimentConfig::initial_estimate() const {
  if (psi_hat0) return *psi_hat0;
  Mat mean = Mat::Zero(psi_vertices.front().rows(), psi_vertices.front().cols());
  for (const auto& v : psi_vertices) mean += v;
  return mean / static_cast<double>(psi_vertices.size());
}

PlantConfig ExperimentConfig::plant_config(std::uint64_t seed) const {
  PlantConfig pc;
  pc.A_true = A_true;
  pc.B_true = B_true;
  if (D_true) pc.D_true = D_true->build();
  ControllerConfig& c = pc.controller;
  c.X = X.build();
  c.U = U.build();
  c.D = D.build();
  c.psi_vertices = psi_vertices;
  c.psi_hat0 = initial_estimate();
  c.Q = Q;
  c.R = R;
  c.N = N;
  c.kappa = kappa;
  c.max_param_vertices = L_max;
  c.synthesis = synthesis;
  c.enforce_reach_inclusion = enforce_reach_inclusion;
  c.reuse_previous_on_infeasible = reuse_previous_on_infeasible;
  c.check_candidate = check_candidate;
  pc.x0 = x0;
  pc.T_steps = T_steps;
  pc.seed = seed;
  pc.policy = policy;
  return pc;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  int line = 0;
  LineSax sax(root, &line);
  CountingIterator first(text.data(), &line), last(text.data() + text.size(), &line);
  try {
    json::sax_parse(first, last, &sax);
  } catch (const json::exception& e) {
    // The DOM builder rethrows the base class, so catch that rather than parse_error.
    std::string detail = e.what();
    const auto colon = detail.find(": ");
    if (colon != std::string::npos) detail = detail.substr(colon + 2);
    throw ConfigError(source, line + 1, "/", "malformed JSON: " + detail);
  }
  const Reader r(source, sax.lines);
  ExperimentConfig c;
  r.object(root, "", {"plant", "constraints", "uncertainty", "controller", "synthesis", "run", "tolerances"});

  const json& plant = r.object(r.required(root, "", "plant"), "/plant", {"A_true", "B_true", "D_true"});
  c.A_true = r.matrix(r.required(plant, "/plant", "A_true"), "/plant/A_true");
  c.B_true = r.matrix(r.required(plant, "/plant", "B_true"), "/plant/B_true");
  if (plant.contains("D_true")) c.D_true = r.polytope(plant.at("D_true"), "/plant/D_true");

  const json& cons = r.object(r.required(root, "", "constraints"), "/constraints", {"X", "U", "D"});
  c.X = r.polytope(r.required(cons, "/constraints", "X"), "/constraints/X");
  c.U = r.polytope(r.required(cons, "/constraints", "U"), "/constraints/U");
  c.D = r.polytope(r.required(cons, "/constraints", "D"), "/constraints/D");

  const json& unc = r.object(r.required(root, "", "uncertainty"), "/uncertainty", {"psi_vertices", "psi_hat0", "L_max"});
  const json& pv = r.required(unc, "/uncertainty", "psi_vertices");
  if (!pv.is_array() || pv.empty()) r.fail("/uncertainty/psi_vertices", "expected a non-empty array of matrices");
  for (std::size_t i = 0; i < pv.size(); ++i)
    c.psi_vertices.push_back(r.matrix(pv[i], "/uncertainty/psi_vertices/" + std::to_string(i)));
  if (unc.contains("psi_hat0")) {
    const json& ph = unc.at("psi_hat0");
    if (!(ph.is_string() && ph.get<std::string>() == "mean")) c.psi_hat0 = r.matrix(ph, "/uncertainty/psi_hat0");
  }
  if (unc.contains("L_max")) c.L_max = static_cast<int>(r.integer(unc.at("L_max"), "/uncertainty/L_max"));

  const json& ctl = r.object(r.required(root, "", "controller"), "/controller",
                             {"N", "Q", "R", "kappa", "enforce_reach_inclusion", "reuse_previous_on_infeasible",
                              "check_candidate"});
  c.N = static_cast<int>(r.integer(r.required(ctl, "/controller", "N"), "/controller/N"));
  c.Q = r.matrix(r.required(ctl, "/controller", "Q"), "/controller/Q");
  c.R = r.matrix(r.required(ctl, "/controller", "R"), "/controller/R");
  c.kappa = r.number(r.required(ctl, "/controller", "kappa"), "/controller/kappa");
  if (ctl.contains("enforce_reach_inclusion"))
    c.enforce_reach_inclusion = r.boolean(ctl.at("enforce_reach_inclusion"), "/controller/enforce_reach_inclusion");
  if (ctl.contains("reuse_previous_on_infeasible"))
    c.reuse_previous_on_infeasible =
        r.boolean(ctl.at("reuse_previous_on_infeasible"), "/controller/reuse_previous_on_infeasible");
  if (ctl.contains("check_candidate"))
    c.check_candidate = r.boolean(ctl.at("check_candidate"), "/controller/check_candidate");

  if (root.contains("synthesis")) {
    const json& syn = r.object(root.at("synthesis"), "/synthesis",
                               {"F_max", "facet_template", "M_max", "shape_template", "rho_max", "s_max",
                                "terminal_max_iter", "shape_growth_steps"});
    auto int_field = [&](const char* key, int& out, int lo) {
      if (!syn.contains(key)) return;
      const std::string path = std::string("/synthesis/") + key;
      const long long v = r.integer(syn.at(key), path);
      if (v < lo) r.fail(path, std::string(key) + " must be at least " + std::to_string(lo));
      out = static_cast<int>(v);
    };
    int_field("F_max", c.synthesis.max_facets, 3);
    int_field("facet_template", c.synthesis.facet_template, 3);
    int_field("M_max", c.synthesis.max_shape_vertices, 1);
    int_field("shape_template", c.synthesis.shape_template, 3);
    int_field("s_max", c.synthesis.s_max, 1);
    int_field("terminal_max_iter", c.synthesis.terminal_max_iter, 1);
    int_field("shape_growth_steps", c.synthesis.shape_growth_steps, 0);
    if (syn.contains("rho_max")) {
      c.synthesis.rho_max = r.number(syn.at("rho_max"), "/synthesis/rho_max");
      if (!(c.synthesis.rho_max > 0.0 && c.synthesis.rho_max < 1.0)) r.fail("/synthesis/rho_max", "rho_max out of (0,1)");
    }
  }

  const json& run = r.object(r.required(root, "", "run"), "/run",
                             {"x0", "T_steps", "seeds", "disturbance_policy", "modes", "out_dir"});
  c.x0 = r.vector(r.required(run, "/run", "x0"), "/run/x0");
  if (run.contains("T_steps")) c.T_steps = static_cast<int>(r.integer(run.at("T_steps"), "/run/T_steps"));
  if (run.contains("seeds")) {
    const json& s = run.at("seeds");
    if (!s.is_array() || s.empty()) r.fail("/run/seeds", "expected a non-empty array of seeds");
    c.seeds.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string path = "/run/seeds/" + std::to_string(i);
      const long long v = r.integer(s[i], path);
      if (v < 0) r.fail(path, "seeds must be non-negative");
      c.seeds.push_back(static_cast<std::uint64_t>(v));
    }
  }
  if (run.contains("disturbance_policy")) {
    try {
      c.policy = parse_policy(r.string(run.at("disturbance_policy"), "/run/disturbance_policy"));
    } catch (const std::invalid_argument& e) {
      r.fail("/run/disturbance_policy", e.what());
    }
  }
  if (run.contains("modes")) {
    const json& m = run.at("modes");
    if (!m.is_array() || m.empty()) r.fail("/run/modes", "expected a non-empty array of modes");
    c.modes.clear();
    for (std::size_t i = 0; i < m.size(); ++i) {
      const std::string path = "/run/modes/" + std::to_string(i);
      try {
        c.modes.push_back(parse_mode(r.string(m[i], path)));
      } catch (const std::invalid_argument& e) {
        r.fail(path, e.what());
      }
    }
  }
  if (run.contains("out_dir")) c.out_dir = r.string(run.at("out_dir"), "/run/out_dir");

  if (root.contains("tolerances")) {
    const json& t = r.object(root.at("tolerances"), "/tolerances",
                             {"containment", "candidate", "nested", "invariance", "decrease"});
    auto tol_field = [&](const char* key, double& out) {
      if (!t.contains(key)) return;
      const std::string path = std::string("/tolerances/") + key;
      out = r.number(t.at(key), path);
      if (!(out >= 0.0)) r.fail(path, "tolerances must be non-negative");
    };
    tol_field("containment", c.tol.containment);
    tol_field("candidate", c.tol.candidate);
    tol_field("nested", c.tol.nested);
    tol_field("invariance", c.tol.invariance);
    tol_field("decrease", c.tol.decrease);
  }

  try {
    validate(c.plant_config(c.seeds.front()));
  } catch (const InvalidConfig& e) {
    r.fail(field_path(e.field()), e.what());
  } catch (const std::exception& e) {
    r.fail("", e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "/", "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string dump_config(const ExperimentConfig& c) {
  json j;
  j["plant"] = {{"A_true", to_json(c.A_true)}, {"B_true", to_json(c.B_true)}};
  if (c.D_true) j["plant"]["D_true"] = to_json(*c.D_true);
  j["constraints"] = {{"X", to_json(c.X)}, {"U", to_json(c.U)}, {"D", to_json(c.D)}};
  json pv = json::array();
  for (const auto& v : c.psi_vertices) pv.push_back(to_json(v));
  j["uncertainty"] = {{"psi_vertices", pv}, {"L_max", c.L_max}};
  j["uncertainty"]["psi_hat0"] = c.psi_hat0 ? to_json(*c.psi_hat0) : json("mean");
  j["controller"] = {{"N", c.N},
                     {"Q", to_json(c.Q)},
                     {"R", to_json(c.R)},
                     {"kappa", c.kappa},
                     {"enforce_reach_inclusion", c.enforce_reach_inclusion},
                     {"reuse_previous_on_infeasible", c.reuse_previous_on_infeasible},
                     {"check_candidate", c.check_candidate}};
  const SynthesisOptions& s = c.synthesis;
  j["synthesis"] = {{"F_max", s.max_facets},
                    {"facet_template", s.facet_template},
                    {"M_max", s.max_shape_vertices},
                    {"shape_template", s.shape_template},
                    {"rho_max", s.rho_max},
                    {"s_max", s.s_max},
                    {"terminal_max_iter", s.terminal_max_iter},
                    {"shape_growth_steps", s.shape_growth_steps}};
  json modes = json::array();
  for (Mode m : c.modes) modes.push_back(to_string(m));
  j["run"] = {{"x0", to_json(c.x0)},
              {"T_steps", c.T_steps},
              {"seeds", c.seeds},
              {"disturbance_policy", to_string(c.policy)},
              {"modes", modes},
              {"out_dir", c.out_dir}};
  j["tolerances"] = {{"containment", c.tol.containment},
                     {"candidate", c.tol.candidate},
                     {"nested", c.tol.nested},
                     {"invariance", c.tol.invariance},
                     {"decrease", c.tol.decrease}};
  return j.dump(2) + "\n";
}

bool same_config(const ExperimentConfig& a, const ExperimentConfig& b) {
  const SynthesisOptions &sa = a.synthesis, &sb = b.synthesis;
  const bool hat = a.psi_hat0.has_value() == b.psi_hat0.has_value() && (!a.psi_hat0 || same(*a.psi_hat0, *b.psi_hat0));
  const bool dt = a.D_true.has_value() == b.D_true.has_value() && (!a.D_true || *a.D_true == *b.D_true);
  return same(a.A_true, b.A_true) && dt && same(a.B_true, b.B_true) && a.X == b.X && a.U == b.U && a.D == b.D &&
         same(a.psi_vertices, b.psi_vertices) && hat && a.L_max == b.L_max && a.N == b.N && same(a.Q, b.Q) &&
         same(a.R, b.R) && a.kappa == b.kappa && a.enforce_reach_inclusion == b.enforce_reach_inclusion &&
         a.reuse_previous_on_infeasible == b.reuse_previous_on_infeasible && a.check_candidate == b.check_candidate &&
         sa.max_facets == sb.max_facets && sa.facet_template == sb.facet_template &&
         sa.max_shape_vertices == sb.max_shape_vertices && sa.shape_template == sb.shape_template &&
         sa.rho_max == sb.rho_max && sa.s_max == sb.s_max && sa.terminal_max_iter == sb.terminal_max_iter &&
         sa.shape_growth_steps == sb.shape_growth_steps && same(a.x0, b.x0) && a.T_steps == b.T_steps &&
         a.seeds == b.seeds && a.policy == b.policy && a.modes == b.modes && a.out_dir == b.out_dir && a.tol == b.tol;
}

}  // namespace atmpc
