#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace dirac {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A 2-component spinor value u(x) = (u1, u2).
struct Vec2 {
  Complex u1{};
  Complex u2{};

  Vec2() = default;
  Vec2(Complex a, Complex b) : u1(a), u2(b) {}

  Vec2& operator+=(const Vec2& o) {
    u1 += o.u1;
    u2 += o.u2;
    return *this;
  }
  Vec2& operator-=(const Vec2& o) {
    u1 -= o.u1;
    u2 -= o.u2;
    return *this;
  }
  Vec2& operator*=(Complex s) {
    u1 *= s;
    u2 *= s;
    return *this;
  }
  friend Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend Vec2 operator*(Complex s, Vec2 a) { return a *= s; }
  friend Vec2 operator*(Vec2 a, Complex s) { return a *= s; }
  friend Vec2 operator/(Vec2 a, Complex s) { return a *= (1.0 / s); }

  double norm() const { return std::sqrt(std::norm(u1) + std::norm(u2)); }
  Vec2 real() const { return {u1.real(), u2.real()}; }
  Vec2 imag() const { return {u1.imag(), u2.imag()}; }
  bool finite() const {
    return std::isfinite(u1.real()) && std::isfinite(u1.imag()) && std::isfinite(u2.real()) &&
           std::isfinite(u2.imag());
  }
};

/// W(f, g) = f1 g2 - f2 g1.
inline Complex wronskian(const Vec2& f, const Vec2& g) { return f.u1 * g.u2 - f.u2 * g.u1; }

/// Bilinear (not Hermitian) product f^T g.
inline Complex bilinear(const Vec2& f, const Vec2& g) { return f.u1 * g.u1 + f.u2 * g.u2; }

/// The rotation i*sigma_2 = [[0, 1], [-1, 0]].
inline Vec2 i_sigma2(const Vec2& u) { return {u.u2, -u.u1}; }

enum class ErrorKind {
  InvalidArgument,
  StepSizeUnderflow,
  NonFiniteValue,
  OutOfRange,
  EvaluationFailed,
  AtPole,
  ClusterSuspected,
  NotAnEigenvalue,
  SlowConvergence,
  NonIntegrableMagnetic,
  InvalidGamma,
  LambdaNotEigenvalue,
  ZEqualsLambda,
  LambdaNotAdmissible,
  ThetaSquareIntegrable,
  UnclassifiableCase,
  SeriesDivergence,
  LogCaseUnsupported,
  KappaTooSmall,
  NoAdmissibleLambda,
  AtomMismatch,
  Inconclusive,
  ParseError,
  ConfigError,
  TaskError,
  IoError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dirac
