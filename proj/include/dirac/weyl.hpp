#pragma once

#include <functional>
#include <vector>

#include "dirac/solution.hpp"

namespace dirac {

enum class Normalization { regular_at_a, radial_frobenius, commuted };

const char* to_string(Normalization n);

/// Real entire solutions Phi, Theta with W(Theta, Phi) = 1.
struct FundamentalSystem {
  Potential pot;
  SolutionFamily phi;
  SolutionFamily theta;
  Normalization tag = Normalization::regular_at_a;
  double tol = kDefaultTol;
  /// Whether Theta(z, .) is square integrable near a (always for a regular a).
  bool theta_in_h = true;
};

/// Phi(z, a) = (0, 1), Theta(z, a) = (1, 0). Requires a regular left endpoint.
FundamentalSystem build_fundamental_system(const PotentialSpec& spec, double tol = kDefaultTol);
FundamentalSystem build_fundamental_system(const Potential& pot, double tol = kDefaultTol);

/// The solution with u(z, b) = bc, integrated from b down to a (or to the
/// start of the regular part for a singular a).
SolutionFamily weyl_solution_plus(const Potential& pot, const Vec2& bc, double tol = kDefaultTol,
                                  double stop_at = kInf);

struct WeylData {
  FundamentalSystem system;
  SolutionFamily uplus;
  Vec2 bc_at_b{0.0, 1.0};
  /// Where the Wronskian quotient is formed.
  double x_eval = 0.5;

  const Potential& pot() const { return system.pot; }
  double tol() const { return system.tol; }
};

/// Dirichlet f1(b) = 0 unless another (beta1, beta2) is given.
WeylData make_weyl_data(FundamentalSystem fs, const Vec2& bc = {0.0, 1.0});

struct WeylValue {
  Complex M;
  Complex w_theta;  // W(Theta, u+)
  Complex w_phi;    // W(Phi, u+)
  double x = 0.0;
};

/// M(z) = -W(Theta, u+) / W(Phi, u+); throws AtPole when the denominator is
/// below 1e-8 |Phi| |u+| at x_eval.
WeylValue weyl_evaluate(const WeylData& wd, Complex z);
Complex weyl_function(const WeylData& wd, Complex z);
/// Psi(z, .) = Theta(z, .) + M(z) Phi(z, .).
Solution weyl_psi(const WeylData& wd, Complex z);

/// lambda -> W(Phi(lambda), u+(lambda)) at x_eval, rotated to be real when a
/// magnetic phase is present.
std::function<double(double)> pole_function(const WeylData& wd, double reference_lambda);

/// Zeros of W(Phi(lambda), u+(lambda)) in [lo, hi].
std::vector<double> eigenvalues(const WeylData& wd, double lo, double hi);

struct Atom {
  double lambda = 0.0;
  double weight = 0.0;
  /// -Res_{z = lambda} M, the independent estimate of the weight.
  double residue_weight = 0.0;
};

struct SpectralMeasureDiscrete {
  std::vector<Atom> atoms;

  double mass_in(double l0, double l1) const;
};

/// weight = 1 / ||Phi(lambda)||^2, cross-checked against the residue of M.
/// Throws NotAnEigenvalue when Phi(lambda) is not proportional to u+(lambda).
SpectralMeasureDiscrete norming_weights(const WeylData& wd, const std::vector<double>& eigs);

struct StieltjesEstimate {
  double value = 0.0;
  double residual = 0.0;
  std::vector<double> eps;
  std::vector<double> raw;  // (1/pi) int Im M(lambda + i eps) per eps
};

/// rho((l0, l1)) from (1/pi) int_{l0}^{l1} Im M(lambda + i eps) d lambda,
/// extrapolated to eps -> 0 by Neville's scheme. Throws SlowConvergence
/// when the last two extrapolants differ by more than `threshold`.
StieltjesEstimate stieltjes_inversion_check(const WeylData& wd, double l0, double l1,
                                            const std::vector<double>& eps_list = {0.4, 0.2, 0.1, 0.05},
                                            double threshold = 1e-3);

using EntireFunction = std::function<Complex(Complex)>;

/// M~(z) for Phi~ = e^g Phi, Theta~ = e^{-g} Theta - f Phi.
Complex gauge_transform_M(const EntireFunction& M, const EntireFunction& g, const EntireFunction& f, Complex z);
/// The same change of fundamental system applied to a WeylData.
WeylData gauge_transform(const WeylData& wd, const EntireFunction& g, const EntireFunction& f);

/// Gamma(x) = exp(-i int_a^x q_mg).
std::function<Complex(double)> magnetic_phase(const PotentialSpec& spec);
/// The same problem without q_mg; u solves it iff Gamma u solves the original.
PotentialSpec eliminate_magnetic(const PotentialSpec& spec);

}  // namespace dirac
