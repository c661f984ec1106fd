#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dirac/types.hpp"

namespace dirac {

/// A real coefficient function on (a, b): constant, callable, parsed
/// expression, or a linearly interpolated (x, value) table.
class Coefficient {
 public:
  Coefficient() = default;  // identically zero

  static Coefficient constant(double c);
  static Coefficient function(std::function<double(double)> f, std::string source = "callable");
  static Coefficient expression(const std::string& text);
  static Coefficient table(std::vector<double> xs, std::vector<double> values, std::string source = "table");
  /// Two-column CSV (x, value); a non-numeric first row is treated as a header.
  static Coefficient from_csv(const std::string& path);

  double operator()(double x) const { return fn_ ? fn_(x) : 0.0; }
  bool is_zero() const { return !fn_; }
  /// Printable description; for expressions and tables this round-trips through the config format.
  const std::string& source() const { return source_; }
  bool serializable() const { return serializable_; }
  /// Abscissae where the coefficient has a kink (table nodes).
  const std::vector<double>& breakpoints() const { return breakpoints_; }

 private:
  std::function<double(double)> fn_;
  std::vector<double> breakpoints_;
  std::string source_ = "0";
  bool serializable_ = true;
};

enum class EndpointKind { regular, singular_radial };

/// Coefficients of Q(x) = el*1 + s1*sigma1 + s3*sigma3 plus the magnetic
/// term mg*sigma2. Every real symmetric 2x2 potential is of this form.
struct PauliTerms {
  double el = 0.0;
  double s1 = 0.0;
  double s3 = 0.0;
  double mg = 0.0;

  PauliTerms& operator+=(const PauliTerms& o) {
    el += o.el;
    s1 += o.s1;
    s3 += o.s3;
    mg += o.mg;
    return *this;
  }
};

/// Problem description for tau = (1/i) sigma2 d/dx + Q(x) on (a, b):
///   Q = q_el + (q_am + kappa/x) sigma1 + (mass + q_sc) sigma3 [+ q_mg sigma2].
struct PotentialSpec {
  double a = 0.0;
  double b = 1.0;
  double mass = 0.0;
  Coefficient q_el;
  Coefficient q_sc;
  Coefficient q_am;
  std::optional<Coefficient> q_mg;
  double kappa = 0.0;
  EndpointKind endpoint_a = EndpointKind::regular;

  /// Throws Error{InvalidArgument} when an invariant is violated.
  void validate() const;

  /// Q(x); includes kappa/x when endpoint_a is singular_radial.
  PauliTerms terms(double x) const;
  /// Q(x) without the kappa/x singularity.
  PauliTerms regular_terms(double x) const;
  /// Union of the coefficient kinks inside (a, b), sorted.
  std::vector<double> breakpoints() const;
};

/// Free Dirac operator on [a, b] (Q = 0).
PotentialSpec free_dirac(double a = 0.0, double b = 1.0);
/// Radial operator kappa/x sigma1 on (0, b] with no further perturbation.
PotentialSpec free_radial(double kappa, double b = 1.0);

/// The potential actually seen by the integrator. Commuted operators add
/// terms to a base potential by composing `terms`.
struct Potential {
  double a = 0.0;
  double b = 1.0;
  std::function<PauliTerms(double)> terms;
  bool magnetic = false;
  bool singular_a = false;
  bool singular_b = false;
  /// Interior points the integrator must not step across.
  std::vector<double> breakpoints;
};

Potential make_potential(const PotentialSpec& spec);

/// sigma2 Q sigma2: flips the sigma1 and sigma3 components.
Potential sigma2_gauge(const Potential& pot);

}  // namespace dirac
