#include "dirac/weyl.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace dirac {

const char* to_string(Normalization n) {
  switch (n) {
    case Normalization::regular_at_a: return "regular_at_a";
    case Normalization::radial_frobenius: return "radial_frobenius";
    case Normalization::commuted: return "commuted";
  }
  return "regular_at_a";
}

FundamentalSystem build_fundamental_system(const Potential& pot, double tol) {
  if (pot.singular_a) {
    throw Error(ErrorKind::InvalidArgument, "singular left endpoint: use the radial Frobenius system");
  }
  FundamentalSystem fs;
  fs.pot = pot;
  fs.tol = tol;
  fs.tag = Normalization::regular_at_a;
  fs.phi = [pot, tol](Complex z) {
    return from_trace(integrate(pot, z, pot.a, {0.0, 1.0}, pot.b, tol, TraceLabel::Phi));
  };
  fs.theta = [pot, tol](Complex z) {
    return from_trace(integrate(pot, z, pot.a, {1.0, 0.0}, pot.b, tol, TraceLabel::Theta));
  };
  return fs;
}

FundamentalSystem build_fundamental_system(const PotentialSpec& spec, double tol) {
  if (spec.endpoint_a != EndpointKind::regular) {
    throw Error(ErrorKind::InvalidArgument, "singular left endpoint: use the radial Frobenius system");
  }
  return build_fundamental_system(make_potential(spec), tol);
}

SolutionFamily weyl_solution_plus(const Potential& pot, const Vec2& bc, double tol, double stop_at) {
  if (bc.norm() == 0.0) throw Error(ErrorKind::InvalidArgument, "boundary vector at b must be nonzero");
  double lo = stop_at;
  if (!std::isfinite(lo)) lo = pot.singular_a ? pot.a + 1e-3 * (pot.b - pot.a) : pot.a;
  return [pot, bc, tol, lo](Complex z) {
    return from_trace(integrate(pot, z, pot.b, bc, lo, tol, TraceLabel::UPlus));
  };
}

WeylData make_weyl_data(FundamentalSystem fs, const Vec2& bc) {
  WeylData wd;
  wd.x_eval = 0.5 * (fs.pot.a + fs.pot.b);
  wd.uplus = weyl_solution_plus(fs.pot, bc, fs.tol, fs.pot.singular_a ? 0.25 * fs.pot.b : kInf);
  wd.bc_at_b = bc;
  wd.system = std::move(fs);
  return wd;
}

WeylValue weyl_evaluate(const WeylData& wd, Complex z) {
  const Solution phi = wd.system.phi(z);
  const Solution theta = wd.system.theta(z);
  const Solution up = wd.uplus(z);
  const double x = wd.x_eval;
  WeylValue v;
  v.x = x;
  v.w_theta = wronskian(theta, up, x);
  v.w_phi = wronskian(phi, up, x);
  const double scale = phi(x).norm() * up(x).norm();
  if (!(std::abs(v.w_phi) >= 1e-8 * scale)) {
    throw Error(ErrorKind::AtPole, "W(Phi, u+) vanishes at z = (" + std::to_string(z.real()) + ", " +
                                       std::to_string(z.imag()) + ")");
  }
  v.M = -v.w_theta / v.w_phi;
  return v;
}

Complex weyl_function(const WeylData& wd, Complex z) { return weyl_evaluate(wd, z).M; }

Solution weyl_psi(const WeylData& wd, Complex z) {
  const Complex m = weyl_function(wd, z);
  return linear_combination(1.0, wd.system.theta(z), m, wd.system.phi(z));
}

std::function<double(double)> pole_function(const WeylData& wd, double reference_lambda) {
  const double x = wd.x_eval;
  auto w = [wd, x](double lam) { return wronskian(wd.system.phi(lam), wd.uplus(lam), x); };
  // Magnetic gauges multiply W by a lambda-independent phase; undo it.
  Complex phase = 1.0;
  if (wd.pot().magnetic) {
    Complex ref = w(reference_lambda);
    if (std::abs(ref) < 1e-6) ref = w(reference_lambda + 0.37);
    phase = std::conj(ref) / std::abs(ref);
  }
  return [w, phase](double lam) { return (phase * w(lam)).real(); };
}

std::vector<double> eigenvalues(const WeylData& wd, double lo, double hi) {
  const double len = wd.pot().b - wd.pot().a;
  const double step = kPi / (4.0 * len);
  const auto f = pole_function(wd, lo);
  std::function<double(double)> deriv;
  if (!wd.pot().magnetic) {
    deriv = [&wd](double lam) {
      const std::function<Complex(Complex)> w = [&wd](Complex z) {
        return wronskian(wd.system.phi(z), wd.uplus(z), wd.x_eval);
      };
      return z_derivative(w, lam, 0.0, true).real();
    };
  }
  return real_zeros(f, lo, hi, step, 1e-13, deriv);
}

double SpectralMeasureDiscrete::mass_in(double l0, double l1) const {
  double m = 0.0;
  for (const auto& a : atoms) {
    if (a.lambda > l0 && a.lambda < l1) m += a.weight;
  }
  return m;
}

SpectralMeasureDiscrete norming_weights(const WeylData& wd, const std::vector<double>& eigs) {
  SpectralMeasureDiscrete out;
  const double x = wd.x_eval;
  for (double lam : eigs) {
    const Solution phi = wd.system.phi(lam);
    const Solution up = wd.uplus(lam);
    const Complex w = wronskian(phi, up, x);
    if (std::abs(w) > 1e-6 * phi(x).norm() * up(x).norm()) {
      throw Error(ErrorKind::NotAnEigenvalue, "Phi(" + std::to_string(lam) + ") does not satisfy the condition at b");
    }
    const double norm2 = l2_norm_sq(phi, phi.lo, phi.hi, wd.tol());
    const std::function<Complex(Complex)> wz = [&wd, x](Complex z) {
      return wronskian(wd.system.phi(z), wd.uplus(z), x);
    };
    const Complex wdot = z_derivative(wz, lam, 0.0, true);
    const Complex wt = wronskian(wd.system.theta(lam), up, x);
    Atom a;
    a.lambda = lam;
    a.weight = 1.0 / norm2;
    a.residue_weight = (wt / wdot).real();
    out.atoms.push_back(a);
  }
  std::sort(out.atoms.begin(), out.atoms.end(), [](const Atom& p, const Atom& q) { return p.lambda < q.lambda; });
  return out;
}

StieltjesEstimate stieltjes_inversion_check(const WeylData& wd, double l0, double l1,
                                            const std::vector<double>& eps_list, double threshold) {
  if (!(l0 < l1)) throw Error(ErrorKind::InvalidArgument, "need l0 < l1");
  if (eps_list.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least two eps values");
  for (std::size_t i = 1; i < eps_list.size(); ++i) {
    if (!(eps_list[i] < eps_list[i - 1]) || !(eps_list[i] > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "eps values must be positive and decreasing");
    }
  }
  StieltjesEstimate est;
  est.eps = eps_list;
  for (double eps : eps_list) {
    auto f = [&](double lam) { return weyl_function(wd, Complex(lam, eps)).imag() / kPi; };
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, l0, l1, 12, 1e-10);
    est.raw.push_back(v);
  }
  // Neville tableau at eps = 0; the expansion is in odd powers of eps, a
  // full polynomial in eps covers it.
  const std::size_t n = eps_list.size();
  std::vector<double> prev = est.raw;
  double last = prev.back();
  double before = prev.size() > 1 ? prev[n - 2] : last;
  for (std::size_t j = 1; j < n; ++j) {
    std::vector<double> cur(n, 0.0);
    for (std::size_t i = j; i < n; ++i) {
      const double ei = eps_list[i];
      const double ej = eps_list[i - j];
      cur[i] = prev[i] + (prev[i] - prev[i - 1]) * ei / (ej - ei);
    }
    before = prev[n - 1];
    last = cur[n - 1];
    prev = std::move(cur);
  }
  est.value = last;
  est.residual = std::abs(last - before);
  if (est.residual > threshold) {
    throw Error(ErrorKind::SlowConvergence,
                "eps extrapolation residual " + std::to_string(est.residual) + " above threshold");
  }
  return est;
}

Complex gauge_transform_M(const EntireFunction& M, const EntireFunction& g, const EntireFunction& f, Complex z) {
  const Complex gz = g(z);
  return std::exp(-2.0 * gz) * M(z) + std::exp(-gz) * f(z);
}

WeylData gauge_transform(const WeylData& wd, const EntireFunction& g, const EntireFunction& f) {
  WeylData out = wd;
  const SolutionFamily phi = wd.system.phi;
  const SolutionFamily theta = wd.system.theta;
  out.system.phi = [phi, g](Complex z) { return scaled(std::exp(g(z)), phi(z)); };
  out.system.theta = [phi, theta, g, f](Complex z) {
    return linear_combination(std::exp(-g(z)), theta(z), -f(z), phi(z));
  };
  return out;
}

std::function<Complex(double)> magnetic_phase(const PotentialSpec& spec) {
  if (!spec.q_mg || spec.q_mg->is_zero()) return [](double) { return Complex(1.0); };
  const Coefficient q = *spec.q_mg;
  const double a = spec.a;
  auto phase = [q, a](double x) {
    if (x == a) return Complex(1.0);
    double err = 0.0;
    double l1 = 0.0;
    const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&q](double y) { return q(y); }, a, x, 15, 1e-13, &err, &l1);
    if (!std::isfinite(integral) || err > 1e-8 * std::max(1.0, l1)) {
      throw Error(ErrorKind::NonIntegrableMagnetic, "q_mg is not integrable from a");
    }
    return std::exp(Complex(0.0, -integral));
  };
  phase(spec.b);
  return phase;
}

PotentialSpec eliminate_magnetic(const PotentialSpec& spec) {
  magnetic_phase(spec);  // throws when q_mg cannot be integrated
  PotentialSpec out = spec;
  out.q_mg.reset();
  return out;
}

}  // namespace dirac
