#pragma once

#include <functional>
#include <vector>

#include "dirac/weyl.hpp"

namespace dirac {

enum class Side { left_from_phi, right_from_theta, right_from_phi };

const char* to_string(Side side);

struct CommutationParams {
  double lambda = 0.0;
  double gamma = 0.0;  // kInf allowed
  Side side = Side::left_from_phi;
};

/// c_gamma(lambda, x) built from a real reference solution u(lambda):
///   left:  1/gamma + int_a^x u^T u
///   right: -1/gamma - int_x^b u^T u
struct CGamma {
  CommutationParams params;
  Solution ref;
  /// Any primitive of ref^T ref on the reference's range.
  std::function<double(double)> primitive;
  double a = 0.0;
  double b = 1.0;
  double p_a = 0.0;  // primitive at a (left side)
  double p_b = 0.0;  // primitive at b
  double inv_gamma = 0.0;
  /// ||ref||^2 over (a, b) when finite (left side), else NaN.
  double norm_sq = 0.0;
  /// c(b) = 0: the removal case gamma = -||Phi||^-2.
  bool vanishes_at_b = false;

  double operator()(double x) const;
};

/// Primitive of u(lambda)^T u(lambda) for an arbitrary real-analytic family,
/// from the Lagrange identity: d/dx W_x(u(lambda), du/dz(lambda)) = -u^T u.
std::function<double(double)> lagrange_gram(const SolutionFamily& family, double lambda);

/// d/dz of a real-analytic family at real lambda, pointwise by complex step.
Solution family_derivative(const SolutionFamily& family, double lambda);

/// Q_gamma(x) = ((u1^2 - u2^2) sigma1 - 2 u1 u2 sigma3) / c_gamma(x).
PauliTerms commuted_terms(const CGamma& c, double x);

/// v = u + (u_ref / c) W_x(u_ref, u) / (z - lambda); solves tau_gamma v = z v.
/// Throws ZEqualsLambda for z = lambda.
Solution transform_solution(const Solution& u, const CGamma& c);

struct CommutedOperator {
  CommutationParams params;
  CGamma c;
  /// Original potential plus Q_gamma.
  Potential pot;
  /// Phi_gamma, Theta_gamma from the transformation formulas and the Weyl
  /// solution of the commuted operator.
  WeylData weyl;
  /// Base data, kept for the M -> M_gamma map.
  WeylData base;
  bool trivial = false;  // gamma = 0

  /// M -> M_gamma for this kind of commutation.
  Complex map_M(Complex z, Complex M) const;
  Complex M_formula(Complex z) const { return map_M(z, weyl_function(base, z)); }
  /// W_b(Theta(lambda), dTheta/dz(lambda)) for right commutations.
  double wb_theta_dot = 0.0;
};

/// Commutation from Phi(lambda) at the left endpoint, finite gamma.
CommutedOperator commute_left_phi(const WeylData& wd, double lambda, double gamma);
/// gamma = infinity from Phi(lambda).
CommutedOperator commute_left_phi_infinite(const WeylData& wd, double lambda);
/// Right-endpoint commutation from Theta(lambda) with M(lambda) = 0, gamma in (0, inf].
CommutedOperator commute_right_theta(const WeylData& wd, double lambda, double gamma);
/// Right-endpoint commutation from u+(lambda) = Phi(lambda) (lambda an eigenvalue);
/// realized as the left commutation with 1/gamma_left = -(1/gamma + ||Phi(lambda)||^2).
CommutedOperator commute_right_phi(const WeylData& wd, double lambda, double gamma);

/// Dispatches on params.side / gamma.
CommutedOperator commute(const WeylData& wd, const CommutationParams& params);

/// The commuted operator's Weyl data built without the transformation
/// formulas wherever the endpoints allow: canonical integration on pot_gamma
/// from a regular a, and u+ integrated from a regular b.
WeylData direct_weyl_data(const CommutedOperator& op);

/// Predicted spectrum after the commutation. `in_h` says whether the
/// reference solution is square integrable.
std::vector<double> spectral_bookkeeping(const std::vector<double>& eigs_before, const CommutationParams& params,
                                         bool in_h, double norm_sq = 0.0);

/// Real zeros of M in [lo, hi] (zeros of W(Theta(lambda), u+(lambda))).
std::vector<double> admissible_lambda_right(const WeylData& wd, double lo, double hi);

/// Residue of f at z0 from the trapezoidal rule on a circle.
Complex contour_residue(const std::function<Complex(Complex)>& f, Complex z0, double radius = 0.1, int n = 64);

}  // namespace dirac
