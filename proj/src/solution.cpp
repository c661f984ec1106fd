#include "dirac/solution.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace dirac {

Solution from_trace(SolutionTrace tr) {
  auto sp = std::make_shared<const SolutionTrace>(std::move(tr));
  Solution s;
  s.z = sp->z();
  s.lo = sp->lo();
  s.hi = sp->hi();
  s.label = sp->label();
  s.trace = sp;
  s.eval = [sp](double x) { return (*sp)(x); };
  s.gram = [sp](double x) { return sp->gram(x); };
  return s;
}

Solution scaled(Complex a, const Solution& u) {
  Solution s = u;
  s.trace.reset();
  s.eval = [a, f = u.eval](double x) { return a * f(x); };
  if (u.gram) s.gram = [a2 = a * a, g = u.gram](double x) { return a2 * g(x); };
  return s;
}

Solution linear_combination(Complex a, const Solution& u, Complex b, const Solution& v) {
  if (b == 0.0) return scaled(a, u);
  if (a == 0.0) return scaled(b, v);
  Solution s;
  s.z = u.z;
  s.lo = std::max(u.lo, v.lo);
  s.hi = std::min(u.hi, v.hi);
  s.singular_lo = u.singular_lo || v.singular_lo;
  s.singular_hi = u.singular_hi || v.singular_hi;
  s.eval = [a, b, f = u.eval, g = v.eval](double x) { return a * f(x) + b * g(x); };
  return s;
}

Complex wronskian(const Solution& u, const Solution& v, double x) {
  if (u.trace && v.trace) return wronskian(*u.trace, *v.trace, x).value;
  return wronskian(u(x), v(x));
}

Complex bilinear_integral(const Solution& u, double c, double d, double tol) {
  if (c < u.lo - 1e-12 || d > u.hi + 1e-12 || c > d) {
    throw Error(ErrorKind::OutOfRange, "integration window outside the solution's range");
  }
  if (u.gram) return u.gram(d) - u.gram(c);

  const double rtol = std::max(tol, 1e-14);
  auto part = [&](auto component) {
    auto f = [&](double x) {
      const Vec2 v = u(x);
      const double r = component(bilinear(v, v));
      return std::isfinite(r) ? r : 0.0;
    };
    if ((u.singular_lo && c <= u.lo) || (u.singular_hi && d >= u.hi)) {
      boost::math::quadrature::tanh_sinh<double> ts;
      return ts.integrate(f, c, d, rtol);
    }
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, c, d, 20, rtol);
  };
  const double re = part([](Complex w) { return w.real(); });
  const bool complex_valued = u.z.imag() != 0.0;
  const double im = complex_valued ? part([](Complex w) { return w.imag(); }) : 0.0;
  return {re, im};
}

double l2_norm_sq(const Solution& u, double c, double d, double tol) {
  return bilinear_integral(u, c, d, tol).real();
}

double l2_norm_sq(const SolutionTrace& u, double c, double d, double tol) {
  if (c < u.lo() || d > u.hi()) throw Error(ErrorKind::OutOfRange, "norm window outside the trace");
  (void)tol;
  return (u.gram(d) - u.gram(c)).real();
}

namespace {

template <class R>
R derivative_impl(const std::function<R(Complex)>& f, Complex z, double h, bool real_analytic) {
  try {
    if (real_analytic && z.imag() == 0.0) {
      const double hs = h > 0.0 ? h : 1e-20;
      const R v = f(Complex(z.real(), hs));
      if constexpr (std::is_same_v<R, Complex>) {
        return Complex(v.imag() / hs, 0.0);
      } else {
        return v.imag() * Complex(1.0 / hs);
      }
    }
    const double hc = h > 0.0 ? h : 1e-3 * std::max(1.0, std::abs(z));
    auto central = [&](double s) { return (f(z + s) - f(z - s)) * Complex(1.0 / (2.0 * s)); };
    const R d1 = central(hc);
    const R d2 = central(hc / 2.0);
    return (d2 * Complex(4.0) - d1) * Complex(1.0 / 3.0);
  } catch (const Error& e) {
    throw Error(ErrorKind::EvaluationFailed, std::string("z-derivative: ") + e.what());
  }
}

}  // namespace

Complex z_derivative(const std::function<Complex(Complex)>& f, Complex z, double h, bool real_analytic) {
  return derivative_impl<Complex>(f, z, h, real_analytic);
}

Vec2 z_derivative(const std::function<Vec2(Complex)>& f, Complex z, double h, bool real_analytic) {
  return derivative_impl<Vec2>(f, z, h, real_analytic);
}

std::vector<double> real_zeros(const std::function<double(double)>& f, double lo, double hi, double step,
                               double xtol, const std::function<double(double)>& deriv) {
  if (!(lo < hi) || !(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "real_zeros needs lo < hi, step > 0");
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step));
  std::vector<double> xs(n + 1);
  std::vector<double> fs(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    xs[i] = i == n ? hi : lo + static_cast<double>(i) * (hi - lo) / static_cast<double>(n);
    fs[i] = f(xs[i]);
    if (!std::isfinite(fs[i])) {
      throw Error(ErrorKind::EvaluationFailed, "non-finite function value at " + std::to_string(xs[i]));
    }
  }

  std::vector<double> roots;
  auto check_orientation = [&](double r, double fl, double fr) {
    if (!deriv) return;
    const double d = deriv(r);
    const double expected = fr - fl;
    if (d * expected < 0.0) {
      throw Error(ErrorKind::ClusterSuspected,
                  "derivative sign at root " + std::to_string(r) + " disagrees with its bracket");
    }
  };

  for (std::size_t i = 0; i <= n; ++i) {
    if (fs[i] == 0.0) {
      roots.push_back(xs[i]);
      continue;
    }
    if (i == 0 || fs[i - 1] == 0.0 || (fs[i - 1] > 0.0) == (fs[i] > 0.0)) continue;
    std::uintmax_t iters = 200;
    auto stop = [xtol](double a, double b) { return std::abs(b - a) <= xtol * std::max(1.0, std::abs(a)); };
    const auto [a, b] = boost::math::tools::toms748_solve(f, xs[i - 1], xs[i], fs[i - 1], fs[i], stop, iters);
    const double r = 0.5 * (a + b);
    check_orientation(r, fs[i - 1], fs[i]);
    roots.push_back(r);
  }
  for (std::size_t i = 1; i < roots.size(); ++i) {
    if (roots[i] - roots[i - 1] < 0.5 * step) {
      throw Error(ErrorKind::ClusterSuspected, "zeros at " + std::to_string(roots[i - 1]) + " and " +
                                                   std::to_string(roots[i]) + " closer than the scan resolution");
    }
  }
  return roots;
}

}  // namespace dirac
