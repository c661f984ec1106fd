#include "dirac/commute.hpp"

#include <algorithm>
#include <cmath>

namespace dirac {

const char* to_string(Side side) {
  switch (side) {
    case Side::left_from_phi: return "left_from_phi";
    case Side::right_from_theta: return "right_from_theta";
    case Side::right_from_phi: return "right_from_phi";
  }
  return "left_from_phi";
}

namespace {

constexpr double kStep = 1e-20;  // complex-step size

std::string num(double v) { return std::to_string(v); }

double inverse(double gamma) { return std::isinf(gamma) ? 0.0 : 1.0 / gamma; }

/// Primitive of u^T u for the reference solution: its own gram when it has
/// one, otherwise the Lagrange identity through the family.
std::function<double(double)> primitive_for(const Solution& ref, const SolutionFamily& family, double lambda) {
  if (ref.gram) return [g = ref.gram](double x) { return g(x).real(); };
  return lagrange_gram(family, lambda);
}

/// u_ref / c as a solution-shaped object (not a solution of anything).
Solution ref_over_c(const CGamma& c) {
  Solution s;
  s.z = c.params.lambda;
  s.lo = c.ref.lo;
  s.hi = c.ref.hi;
  s.singular_lo = c.ref.singular_lo;
  s.eval = [c](double x) { return c.ref(x) / c(x); };
  return s;
}

void require_not_lambda(Complex z, double lambda, const char* what) {
  if (z == Complex(lambda)) {
    throw Error(ErrorKind::ZEqualsLambda, std::string(what) + " has no closed form at z = lambda = " + num(lambda));
  }
}

/// int_a^x Phi(lambda)^T dPhi/dz(lambda) from the complex-step gram of Phi(lambda + ih).
std::function<double(double)> cross_gram_dot(const SolutionFamily& phi, double lambda, double a) {
  const Solution shifted = phi(Complex(lambda, kStep));
  if (!shifted.gram) {
    throw Error(ErrorKind::ZEqualsLambda, "the lambda-limit needs a gram primitive of the reference family");
  }
  const double ga = shifted.gram(a).imag();
  return [g = shifted.gram, ga](double x) { return (g(x).imag() - ga) / (2.0 * kStep); };
}

Potential commuted_potential(const Potential& base, const CGamma& c) {
  Potential p = base;
  p.terms = [inner = base.terms, c](double x) {
    PauliTerms t = inner(x);
    t += commuted_terms(c, x);
    return t;
  };
  return p;
}

double relative_wronskian(const Solution& u, const Solution& v, double x) {
  const double scale = u(x).norm() * v(x).norm();
  return scale > 0.0 ? std::abs(wronskian(u, v, x)) / scale : 0.0;
}

CommutedOperator trivial_operator(const WeylData& wd, const CommutationParams& params) {
  CommutedOperator op;
  op.params = params;
  op.pot = wd.pot();
  op.weyl = wd;
  op.base = wd;
  op.trivial = true;
  op.c.params = params;
  return op;
}

double uplus_stop(const Potential& pot) { return pot.singular_a ? pot.a + 0.25 * (pot.b - pot.a) : pot.a; }

/// u+ of the commuted operator when c(b) = 0. The transformed u+(z) tends to
/// zero as z -> lambda (u+(lambda) is a multiple of the reference there), so
/// it is divided by z - lambda; M does not see the factor. At z = lambda
/// itself the quotient is the symmetric average from z = lambda +- h,
/// extrapolated in h.
SolutionFamily vanishing_uplus(const SolutionFamily& up, const CGamma& c) {
  const double lambda = c.params.lambda;
  const SolutionFamily quotient = [up, c, lambda](Complex z) {
    return scaled(1.0 / (z - lambda), transform_solution(up(z), c));
  };
  return [quotient, lambda](Complex z) {
    if (z != Complex(lambda)) return quotient(z);
    const double h = 1e-3 * std::max(1.0, std::abs(lambda));
    std::vector<Solution> s;
    for (double d : {h, -h, h / 2, -h / 2}) s.push_back(quotient(lambda + d));
    Solution out = s[0];
    out.z = lambda;
    out.gram = nullptr;
    out.eval = [s](double x) { return (4.0 * (s[2](x) + s[3](x)) - (s[0](x) + s[1](x))) / 6.0; };
    return out;
  };
}

}  // namespace

double CGamma::operator()(double x) const {
  switch (params.side) {
    case Side::left_from_phi:
    case Side::right_from_phi:
      if (vanishes_at_b) return -(p_b - primitive(x));
      return inv_gamma + (primitive(x) - p_a);
    case Side::right_from_theta: return -inv_gamma - (p_b - primitive(x));
  }
  return 0.0;
}

std::function<double(double)> lagrange_gram(const SolutionFamily& family, double lambda) {
  const Solution u = family(lambda);
  const Solution ud = family(Complex(lambda, kStep));
  return [u, ud](double x) {
    const Vec2 du = ud(x).imag() / Complex(kStep);
    return -wronskian(u(x), du).real();
  };
}

Solution family_derivative(const SolutionFamily& family, double lambda) {
  const Solution ud = family(Complex(lambda, kStep));
  Solution s;
  s.z = lambda;
  s.lo = ud.lo;
  s.hi = ud.hi;
  s.singular_lo = ud.singular_lo;
  s.eval = [ud](double x) { return ud(x).imag() / Complex(kStep); };
  return s;
}

PauliTerms commuted_terms(const CGamma& c, double x) {
  const Vec2 u = c.ref(x);
  const double u1 = u.u1.real();
  const double u2 = u.u2.real();
  const double cx = c(x);
  PauliTerms t;
  t.s1 = (u1 * u1 - u2 * u2) / cx;
  t.s3 = -2.0 * u1 * u2 / cx;
  return t;
}

Solution transform_solution(const Solution& u, const CGamma& c) {
  const double lambda = c.params.lambda;
  require_not_lambda(u.z, lambda, "the transformed solution");
  const Complex inv = 1.0 / (u.z - lambda);
  Solution v;
  v.z = u.z;
  v.lo = std::max(u.lo, c.ref.lo);
  v.hi = std::min(u.hi, c.ref.hi);
  v.singular_lo = u.singular_lo || c.ref.singular_lo;
  v.singular_hi = u.singular_hi || c.vanishes_at_b;
  v.eval = [u, c, inv](double x) {
    const Vec2 r = c.ref(x);
    const Vec2 ux = u(x);
    return ux + r * (wronskian(r, ux) * inv / c(x));
  };
  return v;
}

Complex CommutedOperator::map_M(Complex z, Complex M) const {
  if (trivial) return M;
  const double lambda = params.lambda;
  const Complex d = z - lambda;
  switch (params.side) {
    case Side::left_from_phi:
    case Side::right_from_phi:
      if (std::isinf(params.gamma)) return d * d * M;
      return M - Complex(c.inv_gamma == 0.0 ? 0.0 : 1.0 / c.inv_gamma) / d;
    case Side::right_from_theta: return (M + wb_theta_dot * d) / (d * d) - c.inv_gamma / d;
  }
  return M;
}

CommutedOperator commute_left_phi(const WeylData& wd, double lambda, double gamma) {
  CommutationParams params{lambda, gamma, Side::left_from_phi};
  if (gamma == 0.0) return trivial_operator(wd, params);
  if (std::isinf(gamma)) {
    if (gamma < 0) throw Error(ErrorKind::InvalidGamma, "gamma = -inf is not admissible");
    return commute_left_phi_infinite(wd, lambda);
  }
  const Potential& pot = wd.pot();
  const SolutionFamily phi = wd.system.phi;
  const SolutionFamily theta = wd.system.theta;
  const Solution phil = phi(lambda);
  const Solution upl = wd.uplus(lambda);
  if (relative_wronskian(phil, upl, wd.x_eval) > 1e-8) {
    throw Error(ErrorKind::LambdaNotEigenvalue,
                "Phi(" + num(lambda) + ") is square integrable but lambda is not an eigenvalue");
  }

  CGamma c;
  c.params = params;
  c.ref = phil;
  c.a = pot.a;
  c.b = pot.b;
  c.primitive = primitive_for(phil, phi, lambda);
  c.p_a = c.primitive(pot.a);
  c.p_b = c.primitive(pot.b);
  c.norm_sq = c.p_b - c.p_a;
  c.inv_gamma = 1.0 / gamma;
  const double lower = -1.0 / c.norm_sq;
  if (std::abs(gamma / lower - 1.0) <= 1e-8) {
    c.vanishes_at_b = true;
    c.inv_gamma = -c.norm_sq;
  } else if (gamma < lower) {
    throw Error(ErrorKind::InvalidGamma, "gamma = " + num(gamma) + " below -||Phi||^-2 = " + num(lower) +
                                             ": c_gamma vanishes inside (a, b)");
  }

  CommutedOperator op;
  op.params = params;
  op.c = c;
  op.base = wd;
  op.pot = commuted_potential(pot, c);
  op.pot.singular_b = c.vanishes_at_b;

  const Solution tphi = ref_over_c(c);
  const SolutionFamily phi_g = [phi, c, tphi, gamma, lambda](Complex z) {
    if (z == Complex(lambda)) return scaled(1.0 / gamma, tphi);
    return transform_solution(phi(z), c);
  };
  const double a = pot.a;
  const SolutionFamily theta_g = [phi, theta, c, tphi, phi_g, gamma, lambda, a](Complex z) {
    if (z == Complex(lambda)) {
      const Solution th = theta(lambda);
      const Solution thd = family_derivative(theta, lambda);
      const Solution phd = family_derivative(phi, lambda);
      const auto ipd = cross_gram_dot(phi, lambda, a);
      const Solution ph = c.ref;
      Solution s;
      s.z = lambda;
      s.lo = std::max(th.lo, ph.lo);
      s.hi = std::min(th.hi, ph.hi);
      s.eval = [=](double x) {
        const Vec2 t = tphi(x);
        return th(x) + t * wronskian(ph(x), thd(x)) + gamma * (phd(x) - t * ipd(x));
      };
      return s;
    }
    return linear_combination(1.0, transform_solution(theta(z), c), gamma / (z - lambda), phi_g(z));
  };

  FundamentalSystem fs;
  fs.pot = op.pot;
  fs.phi = phi_g;
  fs.theta = theta_g;
  fs.tag = Normalization::commuted;
  fs.tol = wd.tol();
  fs.theta_in_h = wd.system.theta_in_h;
  op.weyl = wd;
  op.weyl.system = fs;
  if (c.vanishes_at_b) {
    op.weyl.uplus = vanishing_uplus(wd.uplus, c);
  } else {
    op.weyl.uplus = weyl_solution_plus(op.pot, wd.bc_at_b, wd.tol(), uplus_stop(op.pot));
  }
  return op;
}

CommutedOperator commute_left_phi_infinite(const WeylData& wd, double lambda) {
  CommutationParams params{lambda, kInf, Side::left_from_phi};
  const Potential& pot = wd.pot();
  const SolutionFamily phi = wd.system.phi;
  const SolutionFamily theta = wd.system.theta;
  const Solution phil = phi(lambda);
  if (relative_wronskian(phil, wd.uplus(lambda), wd.x_eval) > 1e-8) {
    throw Error(ErrorKind::LambdaNotEigenvalue,
                "Phi(" + num(lambda) + ") is square integrable but lambda is not an eigenvalue");
  }
  CGamma c;
  c.params = params;
  c.ref = phil;
  c.ref.singular_lo = true;
  c.a = pot.a;
  c.b = pot.b;
  c.primitive = primitive_for(phil, phi, lambda);
  c.p_a = c.primitive(pot.a);
  c.p_b = c.primitive(pot.b);
  c.norm_sq = c.p_b - c.p_a;
  c.inv_gamma = 0.0;

  CommutedOperator op;
  op.params = params;
  op.c = c;
  op.base = wd;
  op.pot = commuted_potential(pot, c);
  op.pot.singular_a = true;

  const Solution tphi = ref_over_c(c);
  const double a = pot.a;
  const SolutionFamily phi_g = [phi, c, tphi, lambda, a](Complex z) {
    if (z == Complex(lambda)) {
      const Solution phd = family_derivative(phi, lambda);
      const auto ipd = cross_gram_dot(phi, lambda, a);
      Solution s = phd;
      s.singular_lo = true;
      s.eval = [phd, tphi, ipd](double x) { return phd(x) - tphi(x) * ipd(x); };
      return s;
    }
    return scaled(1.0 / (z - lambda), transform_solution(phi(z), c));
  };
  const SolutionFamily theta_g = [theta, c, tphi, lambda](Complex z) {
    const Solution th = theta(z);
    Solution s;
    s.z = z;
    s.lo = std::max(th.lo, c.ref.lo);
    s.hi = std::min(th.hi, c.ref.hi);
    s.singular_lo = true;
    const Complex d = z - lambda;
    s.eval = [th, tphi, ref = c.ref, d](double x) {
      const Vec2 t = th(x);
      return d * t + tphi(x) * wronskian(ref(x), t);
    };
    return s;
  };

  FundamentalSystem fs;
  fs.pot = op.pot;
  fs.phi = phi_g;
  fs.theta = theta_g;
  fs.tag = Normalization::commuted;
  fs.tol = wd.tol();
  fs.theta_in_h = false;
  op.weyl = wd;
  op.weyl.system = fs;
  op.weyl.uplus = weyl_solution_plus(op.pot, wd.bc_at_b, wd.tol(), uplus_stop(op.pot));
  return op;
}

CommutedOperator commute_right_theta(const WeylData& wd, double lambda, double gamma) {
  CommutationParams params{lambda, gamma, Side::right_from_theta};
  if (!(gamma > 0.0)) throw Error(ErrorKind::InvalidGamma, "right commutation needs gamma in (0, inf]");
  if (wd.system.theta_in_h) {
    throw Error(ErrorKind::ThetaSquareIntegrable, "Theta(lambda) is square integrable near a");
  }
  const Potential& pot = wd.pot();
  const SolutionFamily phi = wd.system.phi;
  const SolutionFamily theta = wd.system.theta;
  const Solution thl = theta(lambda);
  if (relative_wronskian(thl, wd.uplus(lambda), wd.x_eval) > 1e-8) {
    throw Error(ErrorKind::LambdaNotAdmissible, "M(" + num(lambda) + ") != 0");
  }

  CGamma c;
  c.params = params;
  c.ref = thl;
  c.a = pot.a;
  c.b = pot.b;
  c.primitive = primitive_for(thl, theta, lambda);
  c.p_b = c.primitive(pot.b);
  c.p_a = std::numeric_limits<double>::quiet_NaN();
  c.norm_sq = std::numeric_limits<double>::quiet_NaN();
  c.inv_gamma = inverse(gamma);
  c.vanishes_at_b = std::isinf(gamma);

  CommutedOperator op;
  op.params = params;
  op.c = c;
  op.base = wd;
  op.pot = commuted_potential(pot, c);
  op.pot.singular_b = c.vanishes_at_b;

  const double b = pot.b;
  const std::function<Complex(Complex)> wb = [thl, theta, b](Complex z) { return wronskian(thl(b), theta(z)(b)); };
  op.wb_theta_dot = z_derivative(wb, lambda, 0.0, true).real();
  const double k = c.inv_gamma - op.wb_theta_dot;

  const Solution ttheta = ref_over_c(c);
  const SolutionFamily phi_g = [phi, ttheta, ref = c.ref, lambda](Complex z) {
    const Solution ph = phi(z);
    Solution s;
    s.z = z;
    s.lo = std::max(ph.lo, ref.lo);
    s.hi = std::min(ph.hi, ref.hi);
    s.singular_lo = ph.singular_lo || ref.singular_lo;
    const Complex d = z - lambda;
    s.eval = [ph, ttheta, ref, d](double x) {
      const Vec2 p = ph(x);
      return d * p + ttheta(x) * wronskian(ref(x), p);
    };
    return s;
  };
  const SolutionFamily theta_g = [theta, c, phi_g, k, lambda](Complex z) {
    require_not_lambda(z, lambda, "Theta_gamma");
    const Solution inner = linear_combination(1.0, transform_solution(theta(z), c), k, phi_g(z));
    return scaled(1.0 / (z - lambda), inner);
  };

  FundamentalSystem fs;
  fs.pot = op.pot;
  fs.phi = phi_g;
  fs.theta = theta_g;
  fs.tag = Normalization::commuted;
  fs.tol = wd.tol();
  fs.theta_in_h = wd.system.theta_in_h;
  op.weyl = wd;
  op.weyl.system = fs;
  if (c.vanishes_at_b) {
    op.weyl.uplus = vanishing_uplus(wd.uplus, c);
  } else {
    op.weyl.uplus = weyl_solution_plus(op.pot, wd.bc_at_b, wd.tol(), uplus_stop(op.pot));
  }
  return op;
}

CommutedOperator commute_right_phi(const WeylData& wd, double lambda, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorKind::InvalidGamma, "right commutation needs gamma in (0, inf]");
  const Solution phil = wd.system.phi(lambda);
  if (relative_wronskian(phil, wd.uplus(lambda), wd.x_eval) > 1e-8) {
    throw Error(ErrorKind::LambdaNotEigenvalue, "u+(" + num(lambda) + ") is not proportional to Phi");
  }
  const double norm_sq = l2_norm_sq(phil, phil.lo, phil.hi, wd.tol());
  const double inv_left = -(inverse(gamma) + norm_sq);
  CommutedOperator op = commute_left_phi(wd, lambda, 1.0 / inv_left);
  op.params.side = Side::right_from_phi;
  op.params.gamma = gamma;
  op.c.params.side = Side::right_from_phi;
  return op;
}

CommutedOperator commute(const WeylData& wd, const CommutationParams& params) {
  switch (params.side) {
    case Side::left_from_phi: return commute_left_phi(wd, params.lambda, params.gamma);
    case Side::right_from_theta: return commute_right_theta(wd, params.lambda, params.gamma);
    case Side::right_from_phi: return commute_right_phi(wd, params.lambda, params.gamma);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown side");
}

WeylData direct_weyl_data(const CommutedOperator& op) {
  if (op.trivial || op.pot.singular_a) return op.weyl;
  WeylData d = op.weyl;
  const Potential pot = op.pot;
  const double tol = op.weyl.tol();
  const double hi = pot.singular_b ? d.x_eval : pot.b;
  d.system.phi = [pot, tol, hi](Complex z) {
    return from_trace(integrate(pot, z, pot.a, {0.0, 1.0}, hi, tol, TraceLabel::Phi));
  };
  d.system.theta = [pot, tol, hi](Complex z) {
    return from_trace(integrate(pot, z, pot.a, {1.0, 0.0}, hi, tol, TraceLabel::Theta));
  };
  d.system.tag = Normalization::regular_at_a;
  return d;
}

std::vector<double> spectral_bookkeeping(const std::vector<double>& eigs_before, const CommutationParams& params,
                                         bool in_h, double norm_sq) {
  std::vector<double> out = eigs_before;
  std::sort(out.begin(), out.end());
  const double lambda = params.lambda;
  const double gamma = params.gamma;
  if (gamma == 0.0) return out;
  auto find = [&]() {
    return std::find_if(out.begin(), out.end(), [&](double e) { return std::abs(e - lambda) <= 1e-8; });
  };
  if (!in_h) {
    if (std::isinf(gamma) && gamma > 0) return out;
    if (gamma > 0.0) {
      if (find() != out.end()) {
        throw Error(ErrorKind::UnclassifiableCase, "lambda already in the spectrum but its reference is not in L^2");
      }
      out.insert(std::upper_bound(out.begin(), out.end(), lambda), lambda);
      return out;
    }
    throw Error(ErrorKind::UnclassifiableCase, "gamma < 0 with a reference outside L^2");
  }
  const auto it = find();
  if (it == out.end()) {
    throw Error(ErrorKind::UnclassifiableCase, "reference in L^2 but lambda = " + num(lambda) + " not an eigenvalue");
  }
  if (!(norm_sq > 0.0)) throw Error(ErrorKind::UnclassifiableCase, "norm of the reference solution required");
  const double lower = -1.0 / norm_sq;
  if ((std::isinf(gamma) && gamma > 0) || std::abs(gamma / lower - 1.0) <= 1e-8) {
    out.erase(it);
    return out;
  }
  if (gamma > lower) return out;
  throw Error(ErrorKind::UnclassifiableCase, "gamma below the admissible range");
}

std::vector<double> admissible_lambda_right(const WeylData& wd, double lo, double hi) {
  const double x = wd.x_eval;
  auto f = [&wd, x](double lam) { return wronskian(wd.system.theta(lam), wd.uplus(lam), x).real(); };
  const double step = kPi / (4.0 * (wd.pot().b - wd.pot().a));
  return real_zeros(f, lo, hi, step, 1e-13);
}

Complex contour_residue(const std::function<Complex(Complex)>& f, Complex z0, double radius, int n) {
  Complex sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const Complex e = std::polar(radius, 2.0 * kPi * (k + 0.5) / n);
    sum += f(z0 + e) * e;
  }
  return sum / static_cast<double>(n);
}

}  // namespace dirac
