#include "rmm/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace rmm {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError("field '" + field + "': " + what);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Object view that records which keys were consumed.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string field(const std::string& key) const { return join(path_, key); }

  double number(const std::string& key, double def) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_number()) fail(field(key), "expected a number");
    return v->get<double>();
  }
  int integer(const std::string& key, int def) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_number_integer()) fail(field(key), "expected an integer");
    return v->get<int>();
  }
  bool boolean(const std::string& key, bool def) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_boolean()) fail(field(key), "expected true or false");
    return v->get<bool>();
  }
  std::string string(const std::string& key, const std::string& def) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_string()) fail(field(key), "expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(field(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class T, class F>
std::vector<T> array(Obj& o, const std::string& key, std::vector<T> def, F&& item) {
  const json* v = o.get(key);
  if (!v) return def;
  if (!v->is_array()) fail(o.field(key), "expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < v->size(); ++i) out.push_back(item((*v)[i], o.field(key) + "[" + std::to_string(i) + "]"));
  return out;
}

IsotropicParams parse_material(const json& j, const std::string& path, std::optional<double>& lc) {
  Obj o(j, path);
  IsotropicParams p;
  auto required = [&](const char* key) {
    if (!o.get(key)) fail(o.field(key), "missing");
    return o.number(key, 0.0);
  };
  p.lambda_micro = required("lambda_micro");
  p.mu_micro = required("mu_micro");
  p.lambda_e = required("lambda_e");
  p.mu_e = required("mu_e");
  p.mu = required("mu");
  p.mu_c = o.number("mu_c", 0.0);
  p.L_scale = o.number("L_scale", 1.0);
  if (o.get("Lc")) {
    p.Lc = o.number("Lc", 0.0);
    lc = p.Lc;
  }
  o.finish();
  try {
    p.validate();
  } catch (const ParameterError& e) {
    fail(path, e.what());
  }
  return p;
}

}  // namespace

RunConfig parse_config(const json& j) {
  RunConfig c;
  StudySpec& s = c.study;
  Obj root(j, "");
  try {
    s.bvp = parse_bvp(root.string("bvp", to_string(s.bvp)));
  } catch (const ParameterError& e) {
    fail("bvp", e.what());
  }
  const std::string lcase = root.string("case", "A");
  if (lcase != "A" && lcase != "B") fail("case", "expected \"A\" or \"B\"");
  s.load_case = lcase[0];
  auto pairing = [](const std::string& name, const std::string& field) {
    try {
      return parse_pairing(name);
    } catch (const ParameterError& e) {
      fail(field, e.what());
    }
  };
  s.pairing = pairing(root.string("pairing", to_string(s.pairing)), "pairing");
  s.level = root.integer("level", s.level);
  if (s.level < 0) fail("level", "must be non-negative");

  const bool has_lc = root.get("Lc") != nullptr;
  s.Lc = root.number("Lc", s.Lc);

  if (const json* m = root.get("mesh")) {
    Obj o(*m, "mesh");
    auto opt = [&](const char* key) -> std::optional<int> {
      if (!o.get(key)) return std::nullopt;
      const int v = o.integer(key, 0);
      if (v < 1) fail(o.field(key), "must be positive");
      return v;
    };
    s.mesh.nx = opt("nx");
    s.mesh.ny = opt("ny");
    s.mesh.n_r = opt("n_r");
    s.mesh.n_theta = opt("n_theta");
    o.finish();
  }

  s.lc_values = array<double>(root, "lc_values", s.lc_values, [](const json& v, const std::string& f) {
    if (!v.is_number()) fail(f, "expected a number");
    const double x = v.get<double>();
    if (!(x > 0.0) || !std::isfinite(x)) fail(f, "must be positive and finite");
    return x;
  });
  if (s.lc_values.empty()) fail("lc_values", "must not be empty");
  s.levels = array<int>(root, "levels", s.levels, [](const json& v, const std::string& f) {
    if (!v.is_number_integer() || v.get<int>() < 0) fail(f, "expected a non-negative integer");
    return v.get<int>();
  });
  if (s.levels.empty()) fail("levels", "must not be empty");
  s.pairings = array<Pairing>(root, "pairings", {}, [&](const json& v, const std::string& f) {
    if (!v.is_string()) fail(f, "expected a string");
    return pairing(v.get<std::string>(), f);
  });
  for (Pairing p : s.pairings)
    if (formulation(p).kind != formulation(s.pairing).kind)
      fail("pairings", to_string(p) + " uses a different cell kind than " + to_string(s.pairing));

  s.samples = root.integer("samples", s.samples);
  if (s.samples < 2) fail("samples", "must be at least 2");

  if (const json* m = root.get("materials")) {
    Obj o(*m, "materials");
    MaterialSet set;
    std::optional<double> lc_any;
    for (auto it = m->begin(); it != m->end(); ++it) {
      int region = 0;
      try {
        std::size_t used = 0;
        region = std::stoi(it.key(), &used);
        if (used != it.key().size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        fail(o.field(it.key()), "region keys must be integers");
      }
      o.get(it.key());
      std::optional<double> lc;
      set[region] = parse_material(it.value(), o.field(it.key()), lc);
      if (lc) {
        if (!has_lc && lc_any && *lc_any != *lc) fail("materials", "regions disagree on Lc; set the top-level Lc");
        lc_any = lc;
      }
    }
    o.finish();
    if (set.empty()) fail("materials", "must define at least one region");
    if (!has_lc && lc_any) s.Lc = *lc_any;
    s.materials = std::move(set);
  }
  if (!(s.Lc > 0.0) || !std::isfinite(s.Lc)) fail("Lc", "must be positive and finite");

  if (const json* v = root.get("solver")) {
    Obj o(*v, "solver");
    try {
      s.solver.method = parse_solve_method(o.string("method", to_string(s.solver.method)));
    } catch (const ParameterError& e) {
      fail("solver.method", e.what());
    }
    s.solver.tolerance = o.number("tolerance", s.solver.tolerance);
    if (!(s.solver.tolerance > 0.0)) fail("solver.tolerance", "must be positive");
    s.solver.max_iterations = o.integer("max_iterations", s.solver.max_iterations);
    if (s.solver.max_iterations < 0) fail("solver.max_iterations", "must be non-negative");
    o.finish();
  }
  if (const json* v = root.get("assembly")) {
    Obj o(*v, "assembly");
    s.assembly.quadrature_degree = o.integer("quadrature_degree", s.assembly.quadrature_degree);
    if (s.assembly.quadrature_degree < 0 || s.assembly.quadrature_degree > 8)
      fail("assembly.quadrature_degree", "must be in 0..8 (0: default)");
    s.assembly.threads = o.integer("threads", s.assembly.threads);
    if (s.assembly.threads < 1) fail("assembly.threads", "must be at least 1");
    o.finish();
  }
  if (const json* v = root.get("output")) {
    Obj o(*v, "output");
    c.output.dir = o.string("dir", c.output.dir);
    c.output.vtk = o.boolean("vtk", c.output.vtk);
    c.output.csv = o.boolean("csv", c.output.csv);
    o.finish();
  }
  if (const json* v = root.get("seed")) {
    if (!v->is_number_unsigned()) fail("seed", "expected a non-negative integer");
    s.seed = v->get<std::uint64_t>();
  }
  root.finish();
  return c;
}

RunConfig parse_config_text(std::string_view text, const std::string& source) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Byte offset to line/column.
    const std::size_t pos = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    int line = 1, col = 1;
    for (std::size_t i = 0; i < pos; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
  try {
    return parse_config(j);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

json to_json(const IsotropicParams& p) {
  return json{{"lambda_micro", p.lambda_micro}, {"mu_micro", p.mu_micro}, {"lambda_e", p.lambda_e},
              {"mu_e", p.mu_e},                 {"mu_c", p.mu_c},         {"mu", p.mu},
              {"Lc", p.Lc},                     {"L_scale", p.L_scale}};
}

json to_json(const RunConfig& c) {
  const StudySpec& s = c.study;
  json j;
  j["bvp"] = to_string(s.bvp);
  j["case"] = std::string(1, s.load_case);
  j["pairing"] = to_string(s.pairing);
  j["level"] = s.level;
  j["Lc"] = s.Lc;
  json mesh = json::object();
  if (s.mesh.nx) mesh["nx"] = *s.mesh.nx;
  if (s.mesh.ny) mesh["ny"] = *s.mesh.ny;
  if (s.mesh.n_r) mesh["n_r"] = *s.mesh.n_r;
  if (s.mesh.n_theta) mesh["n_theta"] = *s.mesh.n_theta;
  j["mesh"] = mesh;
  j["lc_values"] = s.lc_values;
  j["levels"] = s.levels;
  json pairings = json::array();
  for (Pairing p : s.pairings) pairings.push_back(to_string(p));
  j["pairings"] = pairings;
  j["samples"] = s.samples;
  if (s.materials) {
    json m = json::object();
    for (const auto& [region, p] : *s.materials) m[std::to_string(region)] = to_json(p);
    j["materials"] = m;
  }
  j["solver"] = {{"method", to_string(s.solver.method)},
                 {"tolerance", s.solver.tolerance},
                 {"max_iterations", s.solver.max_iterations}};
  j["assembly"] = {{"quadrature_degree", s.assembly.quadrature_degree}, {"threads", s.assembly.threads}};
  j["output"] = {{"dir", c.output.dir}, {"vtk", c.output.vtk}, {"csv", c.output.csv}};
  j["seed"] = s.seed;
  return j;
}

}  // namespace rmm
