#include "dirac/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <type_traits>
#include <array>

namespace dirac {

const char* to_string(TraceLabel label) {
  switch (label) {
    case TraceLabel::Phi: return "Phi";
    case TraceLabel::Theta: return "Theta";
    case TraceLabel::UPlus: return "UPlus";
    case TraceLabel::Derived: return "Derived";
  }
  return "Derived";
}

namespace {

// Dormand-Prince 5(4), Hairer's DOPRI5 tableau and dense output.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

constexpr double kRescaleAbove = 1e100;
constexpr std::size_t kMaxSteps = 2'000'000;

template <class T>
using State = std::array<T, 3>;

template <class T>
State<T> axpy(const State<T>& y, double h, std::initializer_list<std::pair<double, const State<T>*>> terms) {
  State<T> out = y;
  for (const auto& [c, k] : terms) {
    for (int i = 0; i < 3; ++i) out[i] += (h * c) * (*k)[i];
  }
  return out;
}

double mag(double v) { return std::abs(v); }
double mag(const Complex& v) { return std::abs(v); }
bool finite(double v) { return std::isfinite(v); }
bool finite(const Complex& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

template <class T>
T take(const Complex& v);
template <>
double take<double>(const Complex& v) {
  return v.real();
}
template <>
Complex take<Complex>(const Complex& v) {
  return v;
}

}  // namespace

template <class T>
struct TraceBuilder {
  using Seg = SolutionTrace::Segment<T>;

  const Potential& pot;
  T z;

  State<T> rhs(double x, const State<T>& y) const {
    const PauliTerms q = pot.terms(x);
    const T zm = z - q.el;
    State<T> d;
    if constexpr (std::is_same_v<T, Complex>) {
      const Complex im(0.0, q.mg);
      d[0] = (-q.s1 - im) * y[0] + (zm + q.s3) * y[1];
      d[1] = -(zm - q.s3) * y[0] + (q.s1 - im) * y[1];
    } else {
      d[0] = -q.s1 * y[0] + (zm + q.s3) * y[1];
      d[1] = -(zm - q.s3) * y[0] + q.s1 * y[1];
    }
    d[2] = y[0] * y[0] + y[1] * y[1];
    return d;
  }

  std::vector<Seg> run(double x0, State<T> y, double x1, double tol) const {
    std::vector<Seg> segs;
    const double span = x1 - x0;
    const double dir = span >= 0 ? 1.0 : -1.0;
    if (span == 0.0) return segs;

    const PauliTerms q0 = pot.terms(x0);
    const double scale = 1.0 + std::abs(Complex(z)) + std::abs(q0.el) + std::abs(q0.s1) + std::abs(q0.s3) +
                         std::abs(q0.mg);
    double h = dir * std::min(std::abs(span), 0.1 / scale);
    double x = x0;
    double log_scale = 0.0;
    State<T> k1 = rhs(x, y);
    bool rejected = false;

    // Kinks strictly between x0 and x1, in the order they are met.
    std::vector<double> stops;
    for (double bp : pot.breakpoints) {
      if (dir * (bp - x0) > 0.0 && dir * (x1 - bp) > 0.0) stops.push_back(bp);
    }
    if (dir < 0) std::reverse(stops.begin(), stops.end());
    std::size_t next_stop = 0;

    for (std::size_t n = 0;; ++n) {
      if (n > kMaxSteps) {
        throw Error(ErrorKind::StepSizeUnderflow, "step budget exhausted near x = " + std::to_string(x));
      }
      if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(x))) {
        throw Error(ErrorKind::StepSizeUnderflow, "step size underflow at x = " + std::to_string(x));
      }
      bool last = false;
      bool at_stop = false;
      if (dir * (x + h - x1) >= 0.0) {
        h = x1 - x;
        last = true;
      }
      if (next_stop < stops.size() && dir * (x + h - stops[next_stop]) >= 0.0) {
        h = stops[next_stop] - x;
        last = false;
        at_stop = true;
      }

      const State<T> k2 = rhs(x + c2 * h, axpy(y, h, {{a21, &k1}}));
      const State<T> k3 = rhs(x + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
      const State<T> k4 = rhs(x + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
      const State<T> k5 = rhs(x + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
      const State<T> k6 = rhs(x + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
      const State<T> ynew = axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
      const double xnew = last ? x1 : (at_stop ? stops[next_stop] : x + h);
      const State<T> k7 = rhs(xnew, ynew);

      double err = 0.0;
      bool ok = true;
      for (int i = 0; i < 3; ++i) {
        if (!finite(ynew[i])) ok = false;
        const T e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        double ref = std::max(mag(y[i]), mag(ynew[i]));
        // The gram increment is h*u^T u; for complex z it cancels, so measure against |h| |u|^2.
        if (i == 2) ref = std::max(ref, std::abs(h) * (std::norm(Complex(y[0])) + std::norm(Complex(y[1]))));
        const double sk = tol + tol * ref;
        err += std::pow(mag(e) / sk, 2);
      }
      err = std::sqrt(err / 3.0);
      if (!ok || !std::isfinite(err)) {
        // A non-finite trial can come from an overly large step; only give up once h is tiny.
        if (std::abs(h) < 1e-10 * std::max(1.0, std::abs(span))) {
          throw Error(ErrorKind::NonFiniteValue, "non-finite solution value near x = " + std::to_string(x));
        }
        h *= 0.2;
        rejected = true;
        continue;
      }

      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
      fac = std::clamp(fac, 0.2, 5.0);
      if (err <= 1.0) {
        Seg s;
        s.x = x;
        s.h = xnew - x;
        s.log_scale = log_scale;
        for (int i = 0; i < 3; ++i) {
          const T ydiff = ynew[i] - y[i];
          const T bspl = s.h * k1[i] - ydiff;
          s.r[0][i] = y[i];
          s.r[1][i] = ydiff;
          s.r[2][i] = bspl;
          s.r[3][i] = ydiff - s.h * k7[i] - bspl;
          s.r[4][i] = s.h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        segs.push_back(s);

        y = ynew;
        k1 = k7;
        x = xnew;
        if (last) break;
        if (at_stop) ++next_stop;

        const double size = std::max(mag(y[0]), mag(y[1]));
        if (size > kRescaleAbove) {
          const double inv = 1.0 / size;
          y[0] *= inv;
          y[1] *= inv;
          y[2] *= inv * inv;
          k1 = rhs(x, y);
          log_scale += std::log(size);
        }
        if (rejected) fac = std::min(fac, 1.0);
        rejected = false;
        h *= fac;
      } else {
        h *= std::min(fac, 1.0);
        rejected = true;
      }
    }
    if (dir < 0) std::reverse(segs.begin(), segs.end());
    return segs;
  }
};

template <class T>
std::size_t SolutionTrace::locate(const std::vector<Segment<T>>& segs, double x) const {
  if (segs.empty() || x < lo_ || x > hi_) {
    throw Error(ErrorKind::OutOfRange, "x = " + std::to_string(x) + " outside [" + std::to_string(lo_) + ", " +
                                           std::to_string(hi_) + "]");
  }
  // First segment whose upper end reaches x.
  auto it = std::lower_bound(segs.begin(), segs.end(), x, [](const Segment<T>& s, double v) {
    return std::max(s.x, s.x + s.h) < v;
  });
  if (it == segs.end()) --it;
  return static_cast<std::size_t>(it - segs.begin());
}

template <class T>
void SolutionTrace::eval_impl(const std::vector<Segment<T>>& segs, double x, Complex out[3], double& log_scale,
                              Complex* slope) const {
  const Segment<T>& s = segs[locate(segs, x)];
  const double th = (x - s.x) / s.h;
  const double th1 = 1.0 - th;
  for (int i = 0; i < 3; ++i) {
    const T C = s.r[3][i] + th1 * s.r[4][i];
    const T B = s.r[2][i] + th * C;
    const T A = s.r[1][i] + th1 * B;
    out[i] = s.r[0][i] + th * A;
    if (slope != nullptr && i < 2) {
      const T dC = -s.r[4][i];
      const T dB = C + th * dC;
      const T dA = -B + th1 * dB;
      slope[i] = (A + th * dA) / s.h;
    }
  }
  log_scale = s.log_scale;
}

std::size_t SolutionTrace::steps() const {
  if (real_) return rsegs_ ? rsegs_->size() : 0;
  return csegs_ ? csegs_->size() : 0;
}

ScaledVec SolutionTrace::scaled(double x) const {
  Complex v[3];
  double ls = 0.0;
  if (real_) {
    eval_impl(*rsegs_, x, v, ls, nullptr);
  } else {
    eval_impl(*csegs_, x, v, ls, nullptr);
  }
  return {Vec2(v[0], v[1]), ls};
}

Vec2 SolutionTrace::operator()(double x) const {
  const ScaledVec s = scaled(x);
  if (s.log_scale == 0.0) return s.v;
  return s.v * std::exp(s.log_scale);
}

Vec2 SolutionTrace::slope(double x) const {
  Complex v[3];
  Complex d[2];
  double ls = 0.0;
  if (real_) {
    eval_impl(*rsegs_, x, v, ls, d);
  } else {
    eval_impl(*csegs_, x, v, ls, d);
  }
  return Vec2(d[0], d[1]) * std::exp(ls);
}

Complex SolutionTrace::gram(double x) const {
  Complex v[3];
  double ls = 0.0;
  if (real_) {
    eval_impl(*rsegs_, x, v, ls, nullptr);
  } else {
    eval_impl(*csegs_, x, v, ls, nullptr);
  }
  return v[2] * std::exp(2.0 * ls);
}

std::vector<double> SolutionTrace::grid() const {
  std::vector<double> g;
  auto collect = [&](const auto& segs) {
    g.reserve(segs.size() + 1);
    for (const auto& s : segs) g.push_back(std::min(s.x, s.x + s.h));
    if (!segs.empty()) g.push_back(std::max(segs.back().x, segs.back().x + segs.back().h));
  };
  if (real_ && rsegs_) collect(*rsegs_);
  if (!real_ && csegs_) collect(*csegs_);
  if (g.empty()) g.push_back(x0_);
  return g;
}

void SolutionTrace::write_csv(std::ostream& os) const {
  os << "x,re_u1,im_u1,re_u2,im_u2\n";
  char buf[160];
  for (double x : grid()) {
    const Vec2 u = (*this)(x);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", x, u.u1.real(), u.u1.imag(), u.u2.real(),
                  u.u2.imag());
    os << buf;
  }
}

SolutionTrace integrate(const Potential& pot, Complex z, double x0, const Vec2& u0, double x1, double tol,
                        TraceLabel label) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  const double lo = std::min(x0, x1);
  const double hi = std::max(x0, x1);
  const double slack = 1e-12 * std::max(1.0, std::abs(pot.b - pot.a));
  if (lo < pot.a - slack || hi > pot.b + slack) {
    throw Error(ErrorKind::OutOfRange, "integration range outside [a, b]");
  }
  if (pot.singular_a && lo <= pot.a) {
    throw Error(ErrorKind::OutOfRange, "cannot integrate up to the singular endpoint a");
  }
  if (!u0.finite()) throw Error(ErrorKind::NonFiniteValue, "non-finite initial data");

  SolutionTrace tr;
  tr.z_ = z;
  tr.label_ = label;
  tr.x0_ = x0;
  tr.lo_ = lo;
  tr.hi_ = hi;
  tr.real_ = z.imag() == 0.0 && u0.u1.imag() == 0.0 && u0.u2.imag() == 0.0 && !pot.magnetic;

  auto finish = [&](auto segs) {
    using Seg = typename decltype(segs)::value_type;
    using T = std::remove_cvref_t<decltype(Seg{}.r[0][0])>;
    for (const auto& s : segs) {
      if (s.log_scale != 0.0) tr.rescaled_ = true;
    }
    if (segs.empty()) {
      // Zero-length range: one constant segment holding the initial value.
      Seg s{};
      s.x = x0;
      s.h = 1.0;
      s.r[0][0] = take<T>(u0.u1);
      s.r[0][1] = take<T>(u0.u2);
      segs.push_back(s);
    }
    return std::make_shared<const decltype(segs)>(std::move(segs));
  };

  if (tr.real_) {
    TraceBuilder<double> b{pot, z.real()};
    tr.rsegs_ = finish(b.run(x0, {u0.u1.real(), u0.u2.real(), 0.0}, x1, tol));
  } else {
    TraceBuilder<Complex> b{pot, z};
    tr.csegs_ = finish(b.run(x0, {u0.u1, u0.u2, Complex(0.0)}, x1, tol));
  }
  return tr;
}

SolutionTrace integrate(const PotentialSpec& spec, Complex z, double x0, const Vec2& u0, double x1, double tol,
                        TraceLabel label) {
  return integrate(make_potential(spec), z, x0, u0, x1, tol, label);
}

WronskianValue wronskian(const SolutionTrace& u, const SolutionTrace& v, double x) {
  const ScaledVec a = u.scaled(x);
  const ScaledVec b = v.scaled(x);
  Complex w = wronskian(a.v, b.v);
  const double ls = a.log_scale + b.log_scale;
  if (ls != 0.0) w *= std::exp(ls);
  return {w, x};
}

Vec2 apply_rhs(const Potential& pot, Complex z, double x, const Vec2& u) {
  const PauliTerms q = pot.terms(x);
  const Complex zm = z - q.el;
  const Complex im(0.0, q.mg);
  return {(-q.s1 - im) * u.u1 + (zm + q.s3) * u.u2, -(zm - q.s3) * u.u1 + (q.s1 - im) * u.u2};
}

}  // namespace dirac
