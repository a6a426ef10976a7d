#include "oswitch/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "oswitch/errors.hpp"
#include "oswitch/expression.hpp"

namespace oswitch {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) bad(where, "expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) bad(where, "unknown key '" + k + "'");
}

double number(const json& obj, const std::string& where, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) bad(where + "." + key, "expected a number");
  return obj[key].get<double>();
}

int integer(const json& obj, const std::string& where, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) bad(where + "." + key, "expected an integer");
  return obj[key].get<int>();
}

bool boolean(const json& obj, const std::string& where, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) bad(where + "." + key, "expected true/false");
  return obj[key].get<bool>();
}

std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) bad(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) bad(where + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

Matrix square_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) bad(where, "expected a non-empty array of rows");
  const Index d = static_cast<Index>(v.size());
  Matrix m(d, d);
  for (Index i = 0; i < d; ++i) {
    const auto row = numbers(v[i], where + "[" + std::to_string(i) + "]");
    if (static_cast<Index>(row.size()) != d)
      bad(where + "[" + std::to_string(i) + "]", "row has " + std::to_string(row.size()) + " entries, expected " +
                                                     std::to_string(d));
    for (Index j = 0; j < d; ++j) m(i, j) = row[j];
  }
  return m;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

json vector_json(const Vector& v) {
  json r = json::array();
  for (Index i = 0; i < v.size(); ++i) r.push_back(v(i));
  return r;
}

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Index>(i)) = v[i];
  return out;
}

// Canonical model block and the model it denotes.
std::pair<json, ControlledTransitionModel> canonical_model(const json& m) {
  const std::string w = "model";
  if (!m.is_object()) bad(w, "expected an object");
  json out;
  ControlledTransitionModel model;
  if (m.contains("builtin")) {
    if (!m["builtin"].is_string()) bad(w + ".builtin", "expected a string");
    const std::string name = m["builtin"].get<std::string>();
    out["builtin"] = name;
    if (name == "example1") {
      only_keys(m, w, {"builtin"});
      model = builtin::example1();
    } else if (name == "example2") {
      only_keys(m, w, {"builtin", "c"});
      out["c"] = number(m, w, "c", 1.0);
      model = builtin::example2(out["c"].get<double>());
    } else if (name == "example3") {
      only_keys(m, w, {"builtin", "grid", "closed_form"});
      out["grid"] = integer(m, w, "grid", 101);
      out["closed_form"] = boolean(m, w, "closed_form", true);
      model = builtin::example3(out["grid"].get<int>(), out["closed_form"].get<bool>());
    } else if (name == "signed-two-control") {
      only_keys(m, w, {"builtin"});
      model = builtin::signed_two_control();
    } else if (name == "classical") {
      only_keys(m, w, {"builtin", "costs"});
      if (!m.contains("costs")) bad(w, "classical needs 'costs' (square matrix, zero diagonal)");
      const Matrix c = square_matrix(m["costs"], w + ".costs");
      out["costs"] = matrix_json(c);
      model = classical_embedding(c);
    } else if (name == "symmetric") {
      only_keys(m, w, {"builtin", "d", "c"});
      out["d"] = integer(m, w, "d", 3);
      out["c"] = number(m, w, "c", 1.0);
      model = builtin::symmetric(out["d"].get<int>(), out["c"].get<double>());
    } else if (name == "dim3") {
      only_keys(m, w, {"builtin", "p", "q", "r", "c"});
      for (const char* k : {"p", "q", "r"}) out[k] = number(m, w, k, 0.5);
      Vector c = Vector::Ones(3);
      if (m.contains("c")) {
        const auto cv = numbers(m["c"], w + ".c");
        if (cv.size() != 3) bad(w + ".c", "expected 3 costs");
        c = to_vector(cv);
      }
      out["c"] = vector_json(c);
      model = builtin::dim3(out["p"].get<double>(), out["q"].get<double>(), out["r"].get<double>(), c);
    } else if (name == "dim4") {
      only_keys(m, w, {"builtin"});
      model = builtin::dim4();
    } else {
      bad(w + ".builtin", "unknown builtin '" + name +
                              "' (example1, example2, example3, signed-two-control, classical, symmetric, dim3, dim4)");
    }
  } else {
    only_keys(m, w, {"name", "controls", "P", "costs"});
    if (!m.contains("P") || !m.contains("costs")) bad(w, "explicit model needs 'P' and 'costs' (or 'builtin')");
    if (!m["P"].is_array() || m["P"].empty()) bad(w + ".P", "expected a non-empty list of matrices");
    if (!m["costs"].is_array()) bad(w + ".costs", "expected a list of cost vectors");
    const std::size_t U = m["P"].size();
    if (m["costs"].size() != U) bad(w + ".costs", "expected one cost vector per matrix");
    std::vector<double> controls;
    if (m.contains("controls")) {
      controls = numbers(m["controls"], w + ".controls");
      if (controls.size() != U) bad(w + ".controls", "expected one label per matrix");
    } else {
      for (std::size_t u = 0; u < U; ++u) controls.push_back(static_cast<double>(u));
    }
    model.name = m.contains("name") && m["name"].is_string() ? m["name"].get<std::string>() : "custom";
    model.controls = controls;
    for (std::size_t u = 0; u < U; ++u) {
      const std::string wu = w + ".P[" + std::to_string(u) + "]";
      model.P.push_back(square_matrix(m["P"][u], wu));
      const auto c = numbers(m["costs"][u], w + ".costs[" + std::to_string(u) + "]");
      model.cbar.push_back(to_vector(c));
    }
    model.d = model.P[0].rows();
    out["name"] = model.name;
    out["controls"] = controls;
    out["P"] = json::array();
    out["costs"] = json::array();
    for (std::size_t u = 0; u < U; ++u) {
      out["P"].push_back(matrix_json(model.P[u]));
      out["costs"].push_back(vector_json(model.cbar[u]));
    }
  }
  try {
    model.check();
  } catch (const ConfigError& e) {
    bad(w, e.what());
  }
  return {out, model};
}

}  // namespace

ProblemConfig parse_config(const std::string& text, const std::string& source) {
  json raw;
  try {
    raw = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  only_keys(raw, source, {"model", "sde", "lattice", "driver", "run"});
  ProblemConfig cfg;
  cfg.source = source;
  json& doc = cfg.doc;
  doc = json::object();

  Index d = 0;
  if (raw.contains("model")) {
    auto [canon, model] = canonical_model(raw["model"]);
    doc["model"] = canon;
    d = model.d;
  }
  if (raw.contains("sde")) {
    const json& s = raw["sde"];
    only_keys(s, "sde", {"b0", "b1", "sigma0", "sigma1", "x0"});
    doc["sde"] = {{"b0", number(s, "sde", "b0", 0.0)},
                  {"b1", number(s, "sde", "b1", 0.0)},
                  {"sigma0", number(s, "sde", "sigma0", 1.0)},
                  {"sigma1", number(s, "sde", "sigma1", 0.0)},
                  {"x0", number(s, "sde", "x0", 0.0)}};
  }
  if (raw.contains("lattice")) {
    const json& l = raw["lattice"];
    only_keys(l, "lattice", {"T", "steps", "quadrature", "coverage", "spacing", "points"});
    std::string q = "trinomial";
    if (l.contains("quadrature")) {
      if (!l["quadrature"].is_string()) bad("lattice.quadrature", "expected a string");
      q = l["quadrature"].get<std::string>();
      if (q != "trinomial" && q != "gaussian") bad("lattice.quadrature", "expected 'trinomial' or 'gaussian'");
    }
    doc["lattice"] = {{"T", number(l, "lattice", "T", 1.0)},
                      {"steps", integer(l, "lattice", "steps", 20)},
                      {"quadrature", q},
                      {"coverage", number(l, "lattice", "coverage", 5.0)},
                      {"spacing", number(l, "lattice", "spacing", 0.0)},
                      {"points", integer(l, "lattice", "points", 0)}};
  }
  if (raw.contains("driver")) {
    const json& dr = raw["driver"];
    only_keys(dr, "driver", {"f", "g", "y_coef", "z_coef"});
    if (d == 0) bad("driver", "needs a model block to fix the number of modes");
    auto exprs = [&](const char* key) {
      json out = json::array();
      if (!dr.contains(key)) {
        for (Index i = 0; i < d; ++i) out.push_back("0");
        return out;
      }
      const json& a = dr[key];
      if (!a.is_array() || static_cast<Index>(a.size()) != d)
        bad(std::string("driver.") + key, "expected " + std::to_string(d) + " expressions");
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string where = std::string("driver.") + key + "[" + std::to_string(i) + "]";
        std::string e;
        if (a[i].is_string()) e = a[i].get<std::string>();
        else if (a[i].is_number()) e = a[i].dump();
        else bad(where, "expected an expression string");
        try {
          compile_expression(e);
        } catch (const ConfigError& err) {
          bad(where, err.what());
        }
        out.push_back(e);
      }
      return out;
    };
    auto coefs = [&](const char* key) {
      if (!dr.contains(key)) return json(std::vector<double>(d, 0.0));
      const auto v = numbers(dr[key], std::string("driver.") + key);
      if (static_cast<Index>(v.size()) != d) bad(std::string("driver.") + key, "expected " + std::to_string(d) + " numbers");
      return json(v);
    };
    doc["driver"] = {{"f", exprs("f")}, {"g", exprs("g")}, {"y_coef", coefs("y_coef")}, {"z_coef", coefs("z_coef")}};
  }
  {
    const json r = raw.contains("run") ? raw["run"] : json::object();
    only_keys(r, "run", {"seed", "paths", "baselines", "samples", "resolution", "refine", "antithetic", "interior_point"});
    json run = {{"seed", r.contains("seed") ? r["seed"] : json(1)},
                {"paths", integer(r, "run", "paths", 10000)},
                {"baselines", integer(r, "run", "baselines", 20)},
                {"samples", integer(r, "run", "samples", 1000)},
                {"resolution", integer(r, "run", "resolution", 180)},
                {"refine", integer(r, "run", "refine", 0)},
                {"antithetic", boolean(r, "run", "antithetic", false)}};
    if (!run["seed"].is_number_unsigned() && !(run["seed"].is_number_integer() && run["seed"].get<long long>() >= 0))
      bad("run.seed", "expected a non-negative integer");
    if (r.contains("interior_point")) {
      const auto v = numbers(r["interior_point"], "run.interior_point");
      if (d != 0 && static_cast<Index>(v.size()) != d) bad("run.interior_point", "expected " + std::to_string(d) + " numbers");
      run["interior_point"] = v;
    }
    doc["run"] = run;
  }
  return cfg;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string emit_config(const ProblemConfig& cfg) { return cfg.doc.dump(2) + "\n"; }

std::string config_hash(const ProblemConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : cfg.doc.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ControlledTransitionModel config_model(const ProblemConfig& cfg) {
  if (!cfg.has("model")) throw ConfigError(cfg.source + ": missing 'model' block");
  return canonical_model(cfg.doc["model"]).second;
}

SdeParams config_sde(const ProblemConfig& cfg) {
  SdeParams s;
  if (!cfg.has("sde")) return s;
  const json& j = cfg.doc["sde"];
  s.b0 = j["b0"];
  s.b1 = j["b1"];
  s.sig0 = j["sigma0"];
  s.sig1 = j["sigma1"];
  s.x0 = j["x0"];
  return s;
}

LatticeSpec config_lattice(const ProblemConfig& cfg) {
  LatticeSpec l;
  if (!cfg.has("lattice")) return l;
  const json& j = cfg.doc["lattice"];
  l.T = j["T"];
  l.steps = j["steps"];
  l.mode = j["quadrature"] == "gaussian" ? Quadrature::gaussian : Quadrature::trinomial;
  l.coverage = j["coverage"];
  l.spacing = j["spacing"];
  l.points = j["points"];
  return l;
}

Driver config_driver(const ProblemConfig& cfg) {
  const Index d = config_model(cfg).d;
  std::vector<std::function<double(double, double)>> base;
  std::vector<std::function<double(double)>> terminal;
  Vector ay = Vector::Zero(d), az = Vector::Zero(d);
  if (cfg.has("driver")) {
    const json& j = cfg.doc["driver"];
    for (Index i = 0; i < d; ++i) {
      base.push_back(compile_expression(j["f"][i].get<std::string>()));
      auto g = compile_expression(j["g"][i].get<std::string>());
      terminal.push_back([g](double x) { return g(0.0, x); });
      ay(i) = j["y_coef"][i];
      az(i) = j["z_coef"][i];
    }
  } else {
    for (Index i = 0; i < d; ++i) {
      base.push_back([](double, double) { return 0.0; });
      terminal.push_back([](double) { return 0.0; });
    }
  }
  Driver drv = make_affine_driver(base, ay, az, terminal);
  drv.description = cfg.has("driver") ? cfg.doc["driver"].dump() : "zero";
  return drv;
}

RunConfig config_run(const ProblemConfig& cfg) {
  RunConfig r;
  const json& j = cfg.doc["run"];
  r.seed = j["seed"].get<std::uint64_t>();
  r.paths = j["paths"];
  r.baselines = j["baselines"];
  r.samples = j["samples"];
  r.resolution = j["resolution"];
  r.refine = j["refine"];
  r.antithetic = j["antithetic"];
  if (j.contains("interior_point")) r.interiorPoint = to_vector(j["interior_point"].get<std::vector<double>>());
  return r;
}

}  // namespace oswitch
