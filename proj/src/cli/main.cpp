#include <cstdio>
#include <iostream>
#include <sstream>
#include <optional>

#include <CLI11.hpp>

#include "csv.hpp"
#include "dirac/cli.hpp"

namespace dirac::cli {

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<double> tol;
  std::optional<int> jobs;
  std::optional<unsigned long long> seed;

  std::optional<std::string> bc;
  std::optional<std::string> z;
  std::optional<std::string> z_grid;
  std::optional<std::string> window;
  std::optional<double> lambda;
  std::optional<std::string> gamma;
  std::optional<std::string> side;
  std::optional<double> kappa;
  std::optional<double> b;
  std::optional<int> steps;
  std::optional<std::string> gamma_policy;
};

std::vector<double> numbers(const std::string& text, const std::string& field, std::size_t count) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ConfigError, "field " + field + ": not a number list: '" + text + "'");
    }
  }
  if (v.size() != count) {
    throw Error(ErrorKind::ConfigError, "field " + field + ": expected " + std::to_string(count) + " numbers");
  }
  return v;
}

void apply(const Flags& f, Task task, RunConfig& cfg) {
  cfg.task = task;
  if (f.out) cfg.out_dir = *f.out;
  if (f.tol) {
    if (!(*f.tol > 0.0 && *f.tol < 1e-2)) throw Error(ErrorKind::ConfigError, "field tol: expected 0 < tol < 1e-2");
    cfg.tol = *f.tol;
  }
  if (f.jobs) {
    if (*f.jobs < 1) throw Error(ErrorKind::ConfigError, "field jobs: need at least 1");
    cfg.jobs = *f.jobs;
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.bc) {
    const auto v = numbers(*f.bc, "bc", 2);
    if (v[0] == 0.0 && v[1] == 0.0) throw Error(ErrorKind::ConfigError, "field bc: (0, 0) is not a boundary condition");
    cfg.bc = {v[0], v[1]};
  }
  if (f.z) {
    const auto v = numbers(*f.z, "z", 2);
    cfg.z = {v[0], v[1]};
  }
  if (f.z_grid) {
    const auto v = numbers(*f.z_grid, "z_grid", 4);
    if (!(v[0] < v[1]) || v[3] < 1.0) throw Error(ErrorKind::ConfigError, "field z_grid: expected from<to and n>=1");
    cfg.z_grid = ZGrid{{}, v[0], v[1], v[2], static_cast<int>(v[3])};
  }
  if (f.window) {
    cfg.window = parse_window(*f.window);
    cfg.window_set = true;
  }
  if (f.lambda) {
    cfg.lambda = *f.lambda;
    cfg.lambda_set = true;
  }
  if (f.gamma) cfg.gamma = parse_gamma(*f.gamma);
  if (f.side) cfg.side = parse_side(*f.side);
  if (f.kappa || f.b) {
    if (f.kappa) cfg.problem.kappa = *f.kappa;
    if (f.b) cfg.problem.b = *f.b;
    cfg.problem.a = 0.0;
    cfg.problem.endpoint_a = EndpointKind::singular_radial;
  }
  if (f.steps) cfg.steps = *f.steps;
  if (f.gamma_policy) cfg.gamma_policy = *f.gamma_policy;
  try {
    cfg.problem.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, std::string("field problem: ") + e.what());
  }
}

void print_report(const RunReport& r) {
  for (const auto& p : r.outputs) std::cout << "wrote " << p << "\n";
  for (const auto& c : r.checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " residual " << format_number(c.residual) << " threshold "
              << format_number(c.threshold) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weyl functions, double commutation and kappa reduction for 1D Dirac operators"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", f.out, "output directory");
  app.add_option("--tol", f.tol, "integrator tolerance");
  app.add_option("--jobs", f.jobs, "worker threads for z sampling");
  app.add_option("--seed", f.seed, "seed for randomized check grids");

  auto* solve = app.add_subcommand("solve", "Phi, Theta and u+ at one z");
  solve->add_option("--z", f.z, "re,im");
  auto* weyl = app.add_subcommand("weyl", "M on a line or point list");
  weyl->add_option("--z-grid", f.z_grid, "from,to,eps,n");
  auto* eigs = app.add_subcommand("eigs", "eigenvalues and norming weights");
  auto* commute = app.add_subcommand("commute", "double commutation and the M map");
  commute->add_option("--lambda", f.lambda, "commutation point");
  commute->add_option("--gamma", f.gamma, "number or inf");
  commute->add_option("--side", f.side, "left, right_theta or right_phi");
  commute->add_option("--z-grid", f.z_grid, "from,to,eps,n");
  auto* reduce = app.add_subcommand("reduce", "kappa lowering for a radial problem");
  reduce->add_option("--kappa", f.kappa, "radial kappa (free radial unless the config says otherwise)");
  reduce->add_option("--b", f.b, "right endpoint");
  reduce->add_option("--steps", f.steps, "stop after this many steps");
  reduce->add_option("--gamma-policy", f.gamma_policy, "unit or fixed:<gamma>");
  auto* check = app.add_subcommand("check", "invariant battery on the configured problem");
  for (auto* sub : {solve, weyl, eigs, commute, check}) sub->add_option("--bc", f.bc, "beta1,beta2 at b");
  for (auto* sub : {weyl, eigs, reduce, check}) sub->add_option("--window", f.window, "lo,hi");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
    const Task task = parse_task(app.get_subcommands().front()->get_name());
    apply(f, task, cfg);
    const RunReport report = run(cfg);
    print_report(report);
    std::fprintf(stderr, "wall time %.3f s\n", report.wall_seconds);
    return report.ok() ? 0 : 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace dirac::cli
