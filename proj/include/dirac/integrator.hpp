#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "dirac/potential.hpp"
#include "dirac/types.hpp"

namespace dirac {

inline constexpr double kDefaultTol = 1e-10;

enum class TraceLabel { Phi, Theta, UPlus, Derived };

const char* to_string(TraceLabel label);

/// A value together with an exponent: the represented quantity is v * exp(log_scale).
struct ScaledVec {
  Vec2 v;
  double log_scale = 0.0;
};

struct WronskianValue {
  Complex value;
  double x = 0.0;
};

/// Solution of u' = i sigma2 (z - Q(x)) u produced by an adaptive
/// Dormand-Prince 5(4) run, with continuous (dense) output on the
/// covered interval. Alongside u the integrator carries the primitive
/// G(x) = int_{x0}^x u^T u, which gives norms without extra quadrature.
///
/// Values that would exceed ~1e100 are stored rescaled; `scaled` exposes
/// the mantissa/exponent pair, `operator()` multiplies it out.
class SolutionTrace {
 public:
  SolutionTrace() = default;

  Complex z() const { return z_; }
  TraceLabel label() const { return label_; }
  void set_label(TraceLabel label) { label_ = label; }
  double x0() const { return x0_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool real_arithmetic() const { return real_; }
  bool rescaled() const { return rescaled_; }
  std::size_t steps() const;

  Vec2 operator()(double x) const;
  ScaledVec scaled(double x) const;
  /// du/dx of the dense interpolant.
  Vec2 slope(double x) const;
  /// int_{x0}^x u^T u (bilinear, so complex for complex z).
  Complex gram(double x) const;

  /// Step endpoints in increasing order.
  std::vector<double> grid() const;

  /// Header row (x, re_u1, im_u1, re_u2, im_u2), one row per grid point, 17 significant digits.
  void write_csv(std::ostream& os) const;

 private:
  template <class T>
  friend struct TraceBuilder;
  friend SolutionTrace integrate(const Potential& pot, Complex z, double x0, const Vec2& u0, double x1, double tol,
                                 TraceLabel label);

  template <class T>
  struct Segment {
    double x = 0.0;      // left end of the step as taken (step start)
    double h = 0.0;      // signed step
    double log_scale = 0.0;
    T r[5][3];
  };

  template <class T>
  std::size_t locate(const std::vector<Segment<T>>& segs, double x) const;
  template <class T>
  void eval_impl(const std::vector<Segment<T>>& segs, double x, Complex out[3], double& log_scale,
                 Complex* slope) const;

  Complex z_{};
  TraceLabel label_ = TraceLabel::Derived;
  double x0_ = 0.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
  bool real_ = false;
  bool rescaled_ = false;
  // Sorted by increasing coverage; only one of the two is populated.
  std::shared_ptr<const std::vector<Segment<double>>> rsegs_;
  std::shared_ptr<const std::vector<Segment<Complex>>> csegs_;
};

/// Integrates from (x0, u0) to x1. Real arithmetic is used whenever z,
/// u0 and the potential are real.
SolutionTrace integrate(const Potential& pot, Complex z, double x0, const Vec2& u0, double x1,
                        double tol = kDefaultTol, TraceLabel label = TraceLabel::Derived);
SolutionTrace integrate(const PotentialSpec& spec, Complex z, double x0, const Vec2& u0, double x1,
                        double tol = kDefaultTol, TraceLabel label = TraceLabel::Derived);

/// u1(x) v2(x) - u2(x) v1(x) from dense output; rescaling exponents are combined exactly.
WronskianValue wronskian(const SolutionTrace& u, const SolutionTrace& v, double x);

/// A(x, z) u for the first-order form, used for residual checks.
Vec2 apply_rhs(const Potential& pot, Complex z, double x, const Vec2& u);

}  // namespace dirac
