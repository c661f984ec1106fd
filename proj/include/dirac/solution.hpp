#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "dirac/integrator.hpp"

namespace dirac {

/// A solution of tau u = z u on [lo, hi], as a callable. Integrated traces,
/// series/ODE composites and commuted solutions all share this shape.
struct Solution {
  Complex z{};
  double lo = 0.0;
  double hi = 0.0;
  std::function<Vec2(double)> eval;
  /// Optional primitive of u^T u; differences of it give norms exactly.
  std::function<Complex(double)> gram;
  /// Endpoints where u^T u may be unbounded; quadrature then uses tanh-sinh.
  bool singular_lo = false;
  bool singular_hi = false;
  TraceLabel label = TraceLabel::Derived;
  std::shared_ptr<const SolutionTrace> trace;

  Vec2 operator()(double x) const { return eval(x); }
};

using SolutionFamily = std::function<Solution(Complex)>;

Solution from_trace(SolutionTrace tr);

/// a u + b v (same z). The gram primitive is kept only when one coefficient vanishes.
Solution linear_combination(Complex a, const Solution& u, Complex b, const Solution& v);
Solution scaled(Complex a, const Solution& u);

Complex wronskian(const Solution& u, const Solution& v, double x);

/// int_c^d u^T u (bilinear). Uses the gram primitive when available,
/// adaptive quadrature otherwise.
Complex bilinear_integral(const Solution& u, double c, double d, double tol = kDefaultTol);

/// int_c^d (u1^2 + u2^2) for a real-valued solution.
double l2_norm_sq(const Solution& u, double c, double d, double tol = kDefaultTol);
double l2_norm_sq(const SolutionTrace& u, double c, double d, double tol = kDefaultTol);

/// df/dz. For real-analytic f (f(conj z) = conj f(z)) at real z this is the
/// complex step Im f(z + ih)/h; otherwise a central difference with one
/// Richardson extrapolation. h <= 0 selects a default.
Complex z_derivative(const std::function<Complex(Complex)>& f, Complex z, double h = 0.0,
                     bool real_analytic = false);
Vec2 z_derivative(const std::function<Vec2(Complex)>& f, Complex z, double h = 0.0, bool real_analytic = false);

/// Zeros of a real function on [lo, hi]: sign-change scan with the given
/// step, each bracket refined by TOMS 748 to `xtol`. If `deriv` is given,
/// its sign at every root must agree with the bracket orientation.
/// Throws ClusterSuspected when roots crowd below half a scan step.
std::vector<double> real_zeros(const std::function<double(double)>& f, double lo, double hi, double step,
                               double xtol = 1e-12, const std::function<double(double)>& deriv = {});

}  // namespace dirac
