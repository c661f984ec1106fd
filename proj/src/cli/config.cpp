#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dirac/cli.hpp"

namespace dirac::cli {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::ConfigError, "field " + field + ": " + what);
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_double(const std::string& text, const std::string& field) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    config_error(field, "not a number: '" + text + "'");
  }
  if (used != t.size() || !std::isfinite(v)) config_error(field, "not a finite number: '" + text + "'");
  return v;
}

std::vector<double> split_numbers(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, field));
  return out;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) config_error(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_error(field, "expected a finite number");
  return v;
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) config_error(field, "expected an integer");
  return j.get<int>();
}

std::string string(const json& j, const std::string& field) {
  if (!j.is_string()) config_error(field, "expected a string");
  return j.get<std::string>();
}

Complex complex_value(const json& j, const std::string& field) {
  if (j.is_number()) return number(j, field);
  if (!j.is_array() || j.size() != 2) config_error(field, "expected a number or [re, im]");
  return {number(j[0], field + "[0]"), number(j[1], field + "[1]")};
}

std::pair<double, double> window_value(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) config_error(field, "expected [lo, hi]");
  const double lo = number(j[0], field + "[0]");
  const double hi = number(j[1], field + "[1]");
  if (!(lo < hi)) config_error(field, "empty window");
  return {lo, hi};
}

void only_keys(const json& j, const std::string& field, std::initializer_list<const char*> keys) {
  if (!j.is_object()) config_error(field, "expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* name) { return k == name; })) {
      config_error(field.empty() ? k : field + "." + k, "unknown key");
    }
  }
}

Coefficient coefficient(const json& j, const std::string& field, const std::string& base_dir) {
  if (j.is_number()) return Coefficient::constant(number(j, field));
  if (j.is_string()) {
    try {
      return Coefficient::expression(j.get<std::string>());
    } catch (const Error& e) {
      config_error(field, e.what());
    }
  }
  if (j.is_object() && j.contains("table")) {
    only_keys(j, field, {"table"});
    std::filesystem::path p = string(j["table"], field + ".table");
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    if (!std::filesystem::exists(p)) config_error(field + ".table", "no such file: " + p.string());
    try {
      return Coefficient::from_csv(p.string());
    } catch (const Error& e) {
      config_error(field + ".table", e.what());
    }
  }
  config_error(field, "expected a number, an expression string or {\"table\": path}");
}

PotentialSpec problem_value(const json& j, const std::string& base_dir) {
  only_keys(j, "problem", {"a", "b", "mass", "kappa", "radial", "q_el", "q_sc", "q_am", "q_mg"});
  PotentialSpec p;
  if (j.contains("a")) p.a = number(j["a"], "problem.a");
  if (j.contains("b")) p.b = number(j["b"], "problem.b");
  if (j.contains("mass")) p.mass = number(j["mass"], "problem.mass");
  if (j.contains("kappa")) p.kappa = number(j["kappa"], "problem.kappa");
  if (j.contains("radial")) {
    if (!j["radial"].is_boolean()) config_error("problem.radial", "expected true or false");
    if (j["radial"].get<bool>()) p.endpoint_a = EndpointKind::singular_radial;
  }
  if (j.contains("q_el")) p.q_el = coefficient(j["q_el"], "problem.q_el", base_dir);
  if (j.contains("q_sc")) p.q_sc = coefficient(j["q_sc"], "problem.q_sc", base_dir);
  if (j.contains("q_am")) p.q_am = coefficient(j["q_am"], "problem.q_am", base_dir);
  if (j.contains("q_mg")) p.q_mg = coefficient(j["q_mg"], "problem.q_mg", base_dir);
  return p;
}

std::string gamma_text(double g) {
  if (std::isinf(g)) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << g;
  return os.str();
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  const auto end = text.begin() + static_cast<std::ptrdiff_t>(std::min(byte, text.size()));
  return 1 + static_cast<std::size_t>(std::count(text.begin(), end, '\n'));
}

}  // namespace

const char* to_string(Task task) {
  switch (task) {
    case Task::solve: return "solve";
    case Task::weyl: return "weyl";
    case Task::eigs: return "eigs";
    case Task::commute: return "commute";
    case Task::reduce: return "reduce";
    case Task::check: return "check";
  }
  return "?";
}

Task parse_task(const std::string& name) {
  for (Task t : {Task::solve, Task::weyl, Task::eigs, Task::commute, Task::reduce, Task::check}) {
    if (name == to_string(t)) return t;
  }
  config_error("task", "unknown task '" + name + "'");
}

std::vector<Complex> ZGrid::values() const {
  if (!points.empty()) return points;
  std::vector<Complex> out;
  const int m = n > 0 ? n : 200;
  for (int k = 0; k < m; ++k) {
    const double t = m == 1 ? 0.0 : static_cast<double>(k) / (m - 1);
    out.emplace_back(from + t * (to - from), eps);
  }
  return out;
}

double parse_gamma(const std::string& text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf") return kInf;
  if (t == "-inf") config_error("gamma", "-inf is not a commutation parameter; use inf");
  return parse_double(t, "gamma");
}

Side parse_side(const std::string& text) {
  const std::string t = trim(text);
  if (t == "left" || t == "left_from_phi") return Side::left_from_phi;
  if (t == "right_theta" || t == "right_from_theta") return Side::right_from_theta;
  if (t == "right_phi" || t == "right_from_phi") return Side::right_from_phi;
  config_error("side", "expected left, right_theta or right_phi, got '" + text + "'");
}

std::pair<double, double> parse_window(const std::string& text) {
  const auto v = split_numbers(text, "window");
  if (v.size() != 2) config_error("window", "expected lo,hi");
  if (!(v[0] < v[1])) config_error("window", "empty window");
  return {v[0], v[1]};
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  only_keys(j, "", {"problem", "bc", "task", "z", "x_samples", "z_grid", "window", "lambda", "gamma", "side",
                    "steps", "gamma_policy", "n_atoms", "out", "tol", "jobs", "seed"});
  RunConfig cfg;
  cfg.base_dir = base_dir;
  if (j.contains("problem")) cfg.problem = problem_value(j["problem"], base_dir);
  if (j.contains("bc")) {
    const json& bc = j["bc"];
    if (!bc.is_array() || bc.size() != 2) config_error("bc", "expected [beta1, beta2]");
    const double b1 = number(bc[0], "bc[0]");
    const double b2 = number(bc[1], "bc[1]");
    if (b1 == 0.0 && b2 == 0.0) config_error("bc", "(0, 0) is not a boundary condition");
    cfg.bc = {b1, b2};
  }
  if (j.contains("task")) cfg.task = parse_task(string(j["task"], "task"));
  if (j.contains("z")) cfg.z = complex_value(j["z"], "z");
  if (j.contains("x_samples")) {
    cfg.x_samples = integer(j["x_samples"], "x_samples");
    if (cfg.x_samples < 2) config_error("x_samples", "need at least 2");
  }
  if (j.contains("z_grid")) {
    const json& g = j["z_grid"];
    only_keys(g, "z_grid", {"points", "from", "to", "eps", "n"});
    if (g.contains("points")) {
      if (!g["points"].is_array() || g["points"].empty()) config_error("z_grid.points", "expected a nonempty list");
      for (std::size_t k = 0; k < g["points"].size(); ++k) {
        cfg.z_grid.points.push_back(complex_value(g["points"][k], "z_grid.points[" + std::to_string(k) + "]"));
      }
    }
    if (g.contains("from")) cfg.z_grid.from = number(g["from"], "z_grid.from");
    if (g.contains("to")) cfg.z_grid.to = number(g["to"], "z_grid.to");
    if (g.contains("eps")) cfg.z_grid.eps = number(g["eps"], "z_grid.eps");
    if (g.contains("n")) {
      cfg.z_grid.n = integer(g["n"], "z_grid.n");
      if (cfg.z_grid.n < 1) config_error("z_grid.n", "need at least one point");
    }
    if (!(cfg.z_grid.from < cfg.z_grid.to)) config_error("z_grid", "from must be below to");
  }
  if (j.contains("window")) {
    cfg.window = window_value(j["window"], "window");
    cfg.window_set = true;
  }
  if (j.contains("lambda")) {
    cfg.lambda = number(j["lambda"], "lambda");
    cfg.lambda_set = true;
  }
  if (j.contains("gamma")) {
    if (j["gamma"].is_string()) {
      cfg.gamma = parse_gamma(j["gamma"].get<std::string>());
    } else {
      cfg.gamma = number(j["gamma"], "gamma");
    }
  }
  if (j.contains("side")) cfg.side = parse_side(string(j["side"], "side"));
  if (j.contains("steps")) cfg.steps = integer(j["steps"], "steps");
  if (j.contains("gamma_policy")) cfg.gamma_policy = string(j["gamma_policy"], "gamma_policy");
  if (j.contains("n_atoms")) {
    const int n = integer(j["n_atoms"], "n_atoms");
    if (n < 1) config_error("n_atoms", "need at least one");
    cfg.n_atoms = static_cast<std::size_t>(n);
  }
  if (j.contains("out")) cfg.out_dir = string(j["out"], "out");
  if (j.contains("tol")) {
    cfg.tol = number(j["tol"], "tol");
    if (!(cfg.tol > 0.0 && cfg.tol < 1e-2)) config_error("tol", "expected 0 < tol < 1e-2");
  }
  if (j.contains("jobs")) {
    cfg.jobs = integer(j["jobs"], "jobs");
    if (cfg.jobs < 1) config_error("jobs", "need at least 1");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) config_error("seed", "expected a non-negative integer");
    cfg.seed = j["seed"].get<unsigned long long>();
  }
  try {
    cfg.problem.validate();
  } catch (const Error& e) {
    config_error("problem", e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

std::string config_to_json(const RunConfig& cfg) {
  auto coef = [](const Coefficient& c) { return c.source(); };
  json p = {{"a", cfg.problem.a},
            {"b", cfg.problem.b},
            {"mass", cfg.problem.mass},
            {"kappa", cfg.problem.kappa},
            {"radial", cfg.problem.endpoint_a == EndpointKind::singular_radial},
            {"q_el", coef(cfg.problem.q_el)},
            {"q_sc", coef(cfg.problem.q_sc)},
            {"q_am", coef(cfg.problem.q_am)}};
  if (cfg.problem.q_mg) p["q_mg"] = coef(*cfg.problem.q_mg);
  json j = {{"problem", p},
            {"bc", {cfg.bc.u1.real(), cfg.bc.u2.real()}},
            {"task", to_string(cfg.task)},
            {"tol", cfg.tol},
            {"seed", cfg.seed}};
  switch (cfg.task) {
    case Task::solve:
      j["z"] = {cfg.z.real(), cfg.z.imag()};
      j["x_samples"] = cfg.x_samples;
      break;
    case Task::weyl:
      if (cfg.z_grid.points.empty()) {
        j["z_grid"] = {{"from", cfg.z_grid.from}, {"to", cfg.z_grid.to}, {"eps", cfg.z_grid.eps},
                       {"n", cfg.z_grid.values().size()}};
      } else {
        j["z_grid"] = {{"points", cfg.z_grid.points.size()}};
      }
      break;
    case Task::eigs:
    case Task::check:
      j["window"] = {cfg.window.first, cfg.window.second};
      break;
    case Task::commute:
      j["lambda"] = cfg.lambda;
      j["gamma"] = gamma_text(cfg.gamma);
      j["side"] = dirac::to_string(cfg.side);
      j["x_samples"] = cfg.x_samples;
      break;
    case Task::reduce:
      j["steps"] = cfg.steps;
      j["gamma_policy"] = cfg.gamma_policy;
      j["n_atoms"] = cfg.n_atoms;
      if (cfg.window_set) j["window"] = {cfg.window.first, cfg.window.second};
      break;
  }
  return j.dump(2);
}

}  // namespace dirac::cli
