#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>

#include <json.hpp>

#include "csv.hpp"
#include "dirac/cli.hpp"

namespace dirac::cli {

namespace {

struct Context {
  const RunConfig& cfg;
  RunReport& report;

  std::string file(const std::string& name) const {
    const std::string p = (std::filesystem::path(cfg.out_dir) / name).string();
    report.outputs.push_back(p);
    return p;
  }
  void check(const std::string& name, double residual, double threshold) {
    const bool pass = std::isfinite(residual) && residual <= threshold;
    report.checks.push_back({name, residual, threshold, pass});
  }
};

bool radial(const PotentialSpec& p) { return p.endpoint_a == EndpointKind::singular_radial; }

RadialSystem radial_system(const RunConfig& cfg) {
  RadialOptions opt;
  opt.tol = cfg.tol;
  opt.bc_at_b = cfg.bc;
  return make_radial_system(cfg.problem, opt);
}

WeylData weyl_data(const RunConfig& cfg) {
  if (radial(cfg.problem)) return radial_system(cfg).weyl;
  return make_weyl_data(build_fundamental_system(cfg.problem, cfg.tol), cfg.bc);
}

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Worst |W(Theta, Phi) - 1| over interior points.
double wronskian_residual(const WeylData& wd, Complex z) {
  const Solution phi = wd.system.phi(z);
  const Solution theta = wd.system.theta(z);
  const double lo = wd.pot().a;
  const double hi = wd.pot().b;
  double worst = 0.0;
  for (int k = 1; k <= 9; ++k) {
    worst = std::max(worst, std::abs(wronskian(theta, phi, lo + (hi - lo) * k / 10.0) - 1.0));
  }
  return worst;
}

double herglotz_violation(const PlotData& m) {
  // 0 when Im M / Im z > 0 everywhere off the real line
  double worst = 0.0;
  for (const auto& r : m.rows) {
    if (r[1] != 0.0) worst = std::max(worst, -r[3] / r[1]);
  }
  return worst;
}

double weight_residue_mismatch(const SpectralMeasureDiscrete& m) {
  double worst = 0.0;
  for (const Atom& a : m.atoms) worst = std::max(worst, std::abs(a.weight / a.residue_weight - 1.0));
  return worst;
}

void task_solve(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const WeylData wd = weyl_data(cfg);
  emit_plot_data(sample_solution(wd.system.phi(cfg.z), cfg.x_samples), PlotKind::trace, ctx.file("phi.csv"));
  emit_plot_data(sample_solution(wd.system.theta(cfg.z), cfg.x_samples), PlotKind::trace, ctx.file("theta.csv"));
  emit_plot_data(sample_solution(wd.uplus(cfg.z), cfg.x_samples), PlotKind::trace, ctx.file("uplus.csv"));
  ctx.check("wronskian_theta_phi", wronskian_residual(wd, cfg.z), 100.0 * cfg.tol);
}

void task_weyl(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const WeylData wd = weyl_data(cfg);
  const PlotData m = sample_M(wd, cfg.z_grid.values(), cfg.jobs);
  emit_plot_data(m, PlotKind::M_on_line, ctx.file("M.csv"));
  // only then is M Herglotz; radial kappa > 1/2 gives a generalized Nevanlinna M
  if (wd.system.theta_in_h) ctx.check("herglotz", herglotz_violation(m), 0.0);
}

void task_eigs(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const WeylData wd = weyl_data(cfg);
  const auto eigs = eigenvalues(wd, cfg.window.first, cfg.window.second);
  if (eigs.empty()) throw Error(ErrorKind::TaskError, "no eigenvalues in the window");
  const auto m = norming_weights(wd, eigs);
  emit_plot_data(measure_rows(m), PlotKind::measure, ctx.file("eigs.csv"));
  ctx.check("weight_vs_residue", weight_residue_mismatch(m), 1e-6);
}

void task_commute(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  if (!cfg.lambda_set) throw Error(ErrorKind::ConfigError, "field lambda: commute needs lambda");
  const WeylData wd = weyl_data(cfg);
  const CommutedOperator op = commute(wd, {cfg.lambda, cfg.gamma, cfg.side});
  emit_plot_data(sample_potential(op.pot, cfg.x_samples), PlotKind::potential, ctx.file("pot_gamma.csv"));

  const WeylData direct = direct_weyl_data(op);
  const auto zs = cfg.z_grid.values();
  const PlotData base = sample_M(wd, zs, cfg.jobs);
  const PlotData mg = sample_M(direct, zs, cfg.jobs);
  emit_plot_data(mg, PlotKind::M_on_line, ctx.file("M_gamma.csv"));
  std::vector<std::vector<double>> rows;
  double worst = 0.0;
  for (std::size_t k = 0; k < zs.size(); ++k) {
    const Complex m(base.rows[k][2], base.rows[k][3]);
    const Complex f = op.map_M(zs[k], m);
    const Complex d(mg.rows[k][2], mg.rows[k][3]);
    const double dev = rel(d, f);
    worst = std::max(worst, dev);
    rows.push_back({zs[k].real(), zs[k].imag(), m.real(), m.imag(), f.real(), f.imag(), d.real(), d.imag(), dev});
  }
  write_csv(ctx.file("M_compare.csv"),
            {"re_z", "im_z", "re_M", "im_M", "re_Mg_formula", "im_Mg_formula", "re_Mg_direct", "im_Mg_direct",
             "rel_dev"},
            rows);
  ctx.check("m_gamma_formula_vs_direct", worst, 1e-6);
}

Chooser chooser_for(const RunConfig& cfg) {
  double gamma = 1.0;
  const std::string& p = cfg.gamma_policy;
  if (p.rfind("fixed:", 0) == 0) {
    gamma = parse_gamma(p.substr(6));
    if (!(gamma > 0.0) || std::isinf(gamma)) {
      throw Error(ErrorKind::ConfigError, "field gamma_policy: lowering steps need 0 < gamma < inf");
    }
  } else if (p != "unit") {
    throw Error(ErrorKind::ConfigError, "field gamma_policy: expected unit or fixed:<gamma>, got '" + p + "'");
  }
  std::optional<std::pair<double, double>> window;
  if (cfg.window_set) window = cfg.window;
  return default_chooser(gamma, window);
}

void task_reduce(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  if (!radial(cfg.problem)) throw Error(ErrorKind::ConfigError, "field problem.radial: reduce needs a radial problem");
  const Chooser chooser = chooser_for(cfg);
  const RadialSystem rs = radial_system(cfg);
  const ReductionLedger ledger = iterate_reduction(rs, chooser, cfg.steps);
  const std::string text = ledger_to_json(ledger);
  write_text(ctx.file("ledger.json"), text + "\n");

  // measures: enough atoms of the original problem for the factorization check
  const double span = 40.0 / (rs.pot().b - rs.pot().a);
  const auto eigs = eigenvalues(rs.weyl, -span, span);
  const auto rho = norming_weights(rs.weyl, eigs);
  emit_plot_data(measure_rows(rho), PlotKind::measure, ctx.file("measure.csv"));
  const FactorizationReport rep = measure_factorization_check(ledger, rho, cfg.n_atoms);
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < rep.lambdas.size(); ++k) {
    const Complex p = polynomial_value(ledger.P.back(), rep.lambdas[k]);
    rows.push_back({rep.lambdas[k], std::norm(p), rep.ratios[k]});
  }
  write_csv(ctx.file("factorization.csv"), {"lambda", "P_squared", "ratio"}, rows);
  ctx.check("factorization_ratio", rep.max_deviation, 1e-5);

  std::vector<Complex> pts;
  for (int k = 0; k < 20; ++k) pts.emplace_back(-10.0 + k, (k % 2 ? 1.0 : -1.0) * (0.2 + 0.3 * (k % 4)));
  ctx.check("terminal_herglotz", herglotz_check(ledger.terminal->weyl, pts) ? 0.0 : 1.0, 0.0);

  double assembled = 0.0;
  double round_trip = 0.0;
  const ReductionLedger back = ledger_from_json(text);
  for (Complex z : {Complex(0.0, 1.0), Complex(3.0, 2.0), Complex(-2.0, 0.5)}) {
    const Complex a = assemble_M(ledger, z);
    assembled = std::max(assembled, rel(a, weyl_function(rs.weyl, z)));
    round_trip = std::max(round_trip, rel(assemble_M(back, z, weyl_function(ledger.terminal->weyl, z)), a));
  }
  ctx.check("assembled_M", assembled, 1e-6);
  ctx.check("ledger_round_trip", round_trip, 1e-12);
}

void task_check(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const WeylData wd = weyl_data(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> re(cfg.window.first, cfg.window.second);
  std::uniform_real_distribution<double> im(0.1, 3.0);
  std::vector<Complex> zs;
  for (int k = 0; k < 8; ++k) {
    const double y = im(rng);
    zs.emplace_back(re(rng), k % 2 ? -y : y);
  }
  double wr = 0.0;
  for (Complex z : zs) wr = std::max(wr, wronskian_residual(wd, z));
  ctx.check("wronskian_theta_phi", wr, 100.0 * cfg.tol);
  const PlotData m = sample_M(wd, zs, cfg.jobs);
  if (wd.system.theta_in_h) ctx.check("herglotz", herglotz_violation(m), 0.0);
  double sym = 0.0;
  for (Complex z : zs) sym = std::max(sym, rel(weyl_function(wd, std::conj(z)), std::conj(weyl_function(wd, z))));
  ctx.check("conjugate_symmetry", sym, 1e-8);

  const auto eigs = eigenvalues(wd, cfg.window.first, cfg.window.second);
  const auto rho = norming_weights(wd, eigs);
  emit_plot_data(measure_rows(rho), PlotKind::measure, ctx.file("measure.csv"));
  ctx.check("weight_vs_residue", weight_residue_mismatch(rho), 1e-6);
  if (eigs.size() >= 3) {
    const double l0 = 0.5 * (eigs[0] + eigs[1]);
    const double l1 = 0.5 * (eigs[1] + eigs[2]);
    const StieltjesEstimate s = stieltjes_inversion_check(wd, l0, l1);
    ctx.check("stieltjes_mass", std::abs(s.value - rho.mass_in(l0, l1)) / rho.mass_in(l0, l1), 1e-3);
  }
}

}  // namespace

bool RunReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.pass; });
}

std::string RunReport::to_json() const {
  nlohmann::json j;
  j["task"] = task;
  j["inputs"] = nlohmann::json::parse(inputs);
  // names only, so the report does not depend on --out
  j["outputs"] = nlohmann::json::array();
  for (const auto& p : outputs) j["outputs"].push_back(std::filesystem::path(p).filename().string());
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    j["checks"].push_back({{"name", c.name}, {"residual", c.residual}, {"threshold", c.threshold}, {"pass", c.pass}});
  }
  j["ok"] = ok();
  return j.dump(2);
}

RunReport run(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport report;
  report.task = to_string(cfg.task);
  report.inputs = config_to_json(cfg);
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + cfg.out_dir + ": " + ec.message());

  Context ctx{cfg, report};
  switch (cfg.task) {
    case Task::solve: task_solve(ctx); break;
    case Task::weyl: task_weyl(ctx); break;
    case Task::eigs: task_eigs(ctx); break;
    case Task::commute: task_commute(ctx); break;
    case Task::reduce: task_reduce(ctx); break;
    case Task::check: task_check(ctx); break;
  }
  const std::string path = (std::filesystem::path(cfg.out_dir) / "report.json").string();
  report.outputs.push_back(path);
  write_text(path, report.to_json() + "\n");
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

int exit_code_for(const Error& e) { return e.kind() == ErrorKind::ConfigError ? 1 : 2; }

}  // namespace dirac::cli
