#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dirac/radial.hpp"

namespace dirac::cli {

enum class Task { solve, weyl, eigs, commute, reduce, check };
const char* to_string(Task task);
Task parse_task(const std::string& name);

/// Either explicit points or n points on [from, to] + i eps.
struct ZGrid {
  std::vector<Complex> points;
  double from = 0.0;
  double to = 10.0;
  double eps = 0.1;
  int n = 0;

  std::vector<Complex> values() const;
};

struct RunConfig {
  PotentialSpec problem = free_dirac();
  Vec2 bc{0.0, 1.0};
  Task task = Task::weyl;

  Complex z{1.0, 1.0};  // solve
  int x_samples = 101;  // solve, commute
  ZGrid z_grid;         // weyl, commute
  std::pair<double, double> window{-10.0, 10.0};
  bool window_set = false;

  double lambda = 0.0;
  bool lambda_set = false;
  double gamma = 1.0;
  Side side = Side::left_from_phi;

  int steps = -1;                   // reduce: all steps
  std::string gamma_policy = "unit";  // or "fixed:<gamma>"
  std::size_t n_atoms = 10;

  std::string out_dir = "out";
  double tol = kDefaultTol;
  int jobs = 1;
  unsigned long long seed = 1;
  std::string base_dir = ".";  // for relative table paths
};

/// "inf" and "+inf" give infinity; "-inf" and anything unparsable throw ConfigError.
double parse_gamma(const std::string& text);
Side parse_side(const std::string& text);
/// "lo,hi" with lo < hi.
std::pair<double, double> parse_window(const std::string& text);

/// Throws ConfigError naming the line (syntax) or the field (content).
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

struct InvariantCheck {
  std::string name;
  double residual = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct RunReport {
  std::string task;
  std::string inputs;  // the effective config, as JSON
  std::vector<std::string> outputs;
  std::vector<InvariantCheck> checks;
  double wall_seconds = 0.0;

  bool ok() const;
  /// Everything except the wall time, so that reruns compare equal.
  std::string to_json() const;
};

std::string config_to_json(const RunConfig& cfg);

/// Runs the task and writes its files under cfg.out_dir, report.json included.
/// Module errors propagate unchanged.
RunReport run(const RunConfig& cfg);

enum class PlotKind { M_on_line, potential, trace, measure };

struct PlotData {
  std::vector<std::vector<double>> rows;
};

/// Fixed headers:
///   M_on_line  re_z, im_z, re_M, im_M
///   potential  x, el, s1, s3, mg
///   trace      x, re_u1, im_u1, re_u2, im_u2
///   measure    lambda, weight (rows sorted by lambda)
const std::vector<std::string>& plot_header(PlotKind kind);

/// Writes a CSV with %.17g numbers and returns `path`. Throws
/// InvalidArgument for empty or ragged samples, IoError when the file
/// cannot be written.
std::string emit_plot_data(const PlotData& samples, PlotKind kind, const std::string& path);

PlotData sample_M(const WeylData& wd, const std::vector<Complex>& zs, int jobs = 1);
PlotData sample_potential(const Potential& pot, int n);
PlotData sample_solution(const Solution& u, int n);
PlotData measure_rows(const SpectralMeasureDiscrete& m);

/// Process exit status for an exception escaping run(): 1 for config
/// problems, 2 otherwise.
int exit_code_for(const Error& e);

/// Entry point behind the executable.
int main(int argc, char** argv);

}  // namespace dirac::cli
