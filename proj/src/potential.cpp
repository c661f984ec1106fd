#include "dirac/potential.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dirac/expr.hpp"

namespace dirac {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::EvaluationFailed: return "EvaluationFailed";
    case ErrorKind::AtPole: return "AtPole";
    case ErrorKind::ClusterSuspected: return "ClusterSuspected";
    case ErrorKind::NotAnEigenvalue: return "NotAnEigenvalue";
    case ErrorKind::SlowConvergence: return "SlowConvergence";
    case ErrorKind::NonIntegrableMagnetic: return "NonIntegrableMagnetic";
    case ErrorKind::InvalidGamma: return "InvalidGamma";
    case ErrorKind::LambdaNotEigenvalue: return "LambdaNotEigenvalue";
    case ErrorKind::ZEqualsLambda: return "ZEqualsLambda";
    case ErrorKind::LambdaNotAdmissible: return "LambdaNotAdmissible";
    case ErrorKind::ThetaSquareIntegrable: return "ThetaSquareIntegrable";
    case ErrorKind::UnclassifiableCase: return "UnclassifiableCase";
    case ErrorKind::SeriesDivergence: return "SeriesDivergence";
    case ErrorKind::LogCaseUnsupported: return "LogCaseUnsupported";
    case ErrorKind::KappaTooSmall: return "KappaTooSmall";
    case ErrorKind::NoAdmissibleLambda: return "NoAdmissibleLambda";
    case ErrorKind::AtomMismatch: return "AtomMismatch";
    case ErrorKind::Inconclusive: return "Inconclusive";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::TaskError: return "TaskError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Coefficient Coefficient::constant(double c) {
  Coefficient out;
  if (c == 0.0) return out;
  out.fn_ = [c](double) { return c; };
  std::ostringstream os;
  os.precision(17);
  os << c;
  out.source_ = os.str();
  return out;
}

Coefficient Coefficient::function(std::function<double(double)> f, std::string source) {
  Coefficient out;
  out.fn_ = std::move(f);
  out.source_ = std::move(source);
  out.serializable_ = false;
  return out;
}

Coefficient Coefficient::expression(const std::string& text) {
  auto expr = Expression::parse(text);
  Coefficient out;
  out.source_ = text;
  if (expr.is_zero_literal()) return out;
  out.fn_ = [expr](double x) { return expr(x); };
  return out;
}

Coefficient Coefficient::table(std::vector<double> xs, std::vector<double> values, std::string source) {
  if (xs.size() != values.size() || xs.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "coefficient table needs at least two (x, value) rows");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "coefficient table abscissae must be strictly increasing");
    }
  }
  Coefficient out;
  out.source_ = std::move(source);
  out.breakpoints_ = xs;
  out.fn_ = [xs = std::move(xs), ys = std::move(values)](double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const auto i = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return (1.0 - t) * ys[i - 1] + t * ys[i];
  };
  return out;
}

Coefficient Coefficient::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open coefficient table '" + path + "'");
  std::vector<double> xs;
  std::vector<double> ys;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x = 0.0;
    double y = 0.0;
    if (!(row >> x >> y)) {
      if (lineno == 1) continue;  // header
      throw Error(ErrorKind::IoError, path + ":" + std::to_string(lineno) + ": expected two numeric columns");
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  return table(std::move(xs), std::move(ys), "table:" + path);
}

void PotentialSpec::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
    throw Error(ErrorKind::InvalidArgument, "interval endpoints must be finite with a < b");
  }
  if (!(mass >= 0.0)) throw Error(ErrorKind::InvalidArgument, "mass must be non-negative");
  if (endpoint_a == EndpointKind::singular_radial) {
    if (a != 0.0) throw Error(ErrorKind::InvalidArgument, "radial operators live on (0, b]");
    if (!(kappa >= 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "radial kappa must be >= 0 (apply the sigma2 gauge first)");
    }
  }
  // Integrability of the coefficients on [a + eps, b]: a sampled quadrature must stay finite.
  const double eps = 1e-6 * (b - a);
  auto check = [&](const Coefficient& c, const char* name) {
    if (c.is_zero()) return;
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        [&](double x) { return std::abs(c(x)); }, a + eps, b, 8, 1e-6, &err);
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::InvalidArgument, std::string("coefficient ") + name + " is not integrable");
    }
  };
  check(q_el, "q_el");
  check(q_sc, "q_sc");
  check(q_am, "q_am");
  if (q_mg) check(*q_mg, "q_mg");
}

PauliTerms PotentialSpec::regular_terms(double x) const {
  PauliTerms t;
  t.el = q_el(x);
  t.s1 = q_am(x);
  t.s3 = mass + q_sc(x);
  if (q_mg) t.mg = (*q_mg)(x);
  return t;
}

PauliTerms PotentialSpec::terms(double x) const {
  PauliTerms t = regular_terms(x);
  if (endpoint_a == EndpointKind::singular_radial) t.s1 += kappa / x;
  return t;
}

std::vector<double> PotentialSpec::breakpoints() const {
  std::vector<double> out;
  auto add = [&](const Coefficient& c) {
    for (double x : c.breakpoints()) {
      if (x > a && x < b) out.push_back(x);
    }
  };
  add(q_el);
  add(q_sc);
  add(q_am);
  if (q_mg) add(*q_mg);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PotentialSpec free_dirac(double a, double b) {
  PotentialSpec p;
  p.a = a;
  p.b = b;
  return p;
}

PotentialSpec free_radial(double kappa, double b) {
  PotentialSpec p;
  p.a = 0.0;
  p.b = b;
  p.kappa = kappa;
  p.endpoint_a = EndpointKind::singular_radial;
  return p;
}

Potential make_potential(const PotentialSpec& spec) {
  spec.validate();
  Potential pot;
  pot.a = spec.a;
  pot.b = spec.b;
  pot.magnetic = spec.q_mg.has_value() && !spec.q_mg->is_zero();
  pot.singular_a = spec.endpoint_a == EndpointKind::singular_radial;
  pot.terms = [spec](double x) { return spec.terms(x); };
  pot.breakpoints = spec.breakpoints();
  return pot;
}

Potential sigma2_gauge(const Potential& pot) {
  Potential out = pot;
  out.terms = [inner = pot.terms](double x) {
    PauliTerms t = inner(x);
    t.s1 = -t.s1;
    t.s3 = -t.s3;
    return t;
  };
  return out;
}

}  // namespace dirac
