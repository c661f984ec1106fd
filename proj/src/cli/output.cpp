#include <algorithm>
#include <cstdio>
#include <fstream>
#include <thread>

#include "csv.hpp"
#include "dirac/cli.hpp"

namespace dirac::cli {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);  // no "-0"
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::string text;
  for (std::size_t i = 0; i < header.size(); ++i) text += (i ? "," : "") + header[i];
  text += '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) text += (i ? "," : "") + format_number(r[i]);
    text += '\n';
  }
  write_text(path, text);
}

const std::vector<std::string>& plot_header(PlotKind kind) {
  static const std::vector<std::string> m = {"re_z", "im_z", "re_M", "im_M"};
  static const std::vector<std::string> pot = {"x", "el", "s1", "s3", "mg"};
  static const std::vector<std::string> trace = {"x", "re_u1", "im_u1", "re_u2", "im_u2"};
  static const std::vector<std::string> measure = {"lambda", "weight"};
  switch (kind) {
    case PlotKind::M_on_line: return m;
    case PlotKind::potential: return pot;
    case PlotKind::trace: return trace;
    case PlotKind::measure: return measure;
  }
  return m;
}

std::string emit_plot_data(const PlotData& samples, PlotKind kind, const std::string& path) {
  if (samples.rows.empty()) throw Error(ErrorKind::InvalidArgument, "no samples to write");
  const auto& header = plot_header(kind);
  for (const auto& r : samples.rows) {
    if (r.size() != header.size()) {
      throw Error(ErrorKind::InvalidArgument, "row has " + std::to_string(r.size()) + " columns, expected " +
                                                  std::to_string(header.size()));
    }
  }
  if (kind == PlotKind::measure) {
    auto rows = samples.rows;
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a[0] < b[0]; });
    write_csv(path, header, rows);
  } else {
    write_csv(path, header, samples.rows);
  }
  return path;
}

PlotData sample_M(const WeylData& wd, const std::vector<Complex>& zs, int jobs) {
  PlotData d;
  d.rows.resize(zs.size());
  std::vector<std::exception_ptr> errors(zs.size());
  auto work = [&](std::size_t start, std::size_t stride) {
    for (std::size_t k = start; k < zs.size(); k += stride) {
      try {
        const Complex m = weyl_function(wd, zs[k]);
        d.rows[k] = {zs[k].real(), zs[k].imag(), m.real(), m.imag()};
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, jobs));
  if (n == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work, t, n);
    for (auto& t : pool) t.join();
  }
  // first failure in grid order, independent of scheduling
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return d;
}

PlotData sample_potential(const Potential& pot, int n) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "need at least two samples");
  const double len = pot.b - pot.a;
  const double lo = pot.a + (pot.singular_a ? 1e-3 * len : 0.0);
  const double hi = pot.b - (pot.singular_b ? 1e-3 * len : 0.0);
  PlotData d;
  for (int k = 0; k < n; ++k) {
    const double x = lo + (hi - lo) * k / (n - 1);
    const PauliTerms q = pot.terms(x);
    d.rows.push_back({x, q.el, q.s1, q.s3, q.mg});
  }
  return d;
}

PlotData sample_solution(const Solution& u, int n) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "need at least two samples");
  const double len = u.hi - u.lo;
  const double lo = u.lo + (u.singular_lo ? 1e-3 * len : 0.0);
  const double hi = u.hi - (u.singular_hi ? 1e-3 * len : 0.0);
  PlotData d;
  for (int k = 0; k < n; ++k) {
    const double x = lo + (hi - lo) * k / (n - 1);
    const Vec2 v = u(x);
    d.rows.push_back({x, v.u1.real(), v.u1.imag(), v.u2.real(), v.u2.imag()});
  }
  return d;
}

PlotData measure_rows(const SpectralMeasureDiscrete& m) {
  PlotData d;
  for (const Atom& a : m.atoms) d.rows.push_back({a.lambda, a.weight});
  return d;
}

}  // namespace dirac::cli
