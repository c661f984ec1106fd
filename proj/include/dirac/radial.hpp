#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dirac/commute.hpp"

namespace dirac {

/// sqrt(pi) / (2^kappa Gamma(kappa + 1/2)).
double frobenius_norm_constant(double kappa);

/// Taylor coefficients at x = 0 of the regular part of Q, from a
/// least-squares polynomial fit on [0, h].
struct TaylorData {
  std::vector<double> el;
  std::vector<double> am;
  std::vector<double> s3;  // mass + q_sc
  double h = 0.0;
  double fit_residual = 0.0;
};

/// Throws SeriesDivergence when the fit misses Q on [0, h] by more than
/// max_residual (relative).
TaylorData taylor_coefficients(const PotentialSpec& spec, double h, int degree = 10, double max_residual = 1e-9);

enum class SeriesKind { phi, theta };

/// u(x) = x^rho sum_n a_n x^n near the singular endpoint.
struct FrobeniusSeries {
  double rho = 0.0;
  std::vector<Vec2> a;

  Vec2 operator()(double x) const;
  /// The primitive sum_n c_n x^{2 rho + n + 1} / (2 rho + n + 1) of u^T u
  /// (zero at 0 when that integral converges).
  Complex gram(double x) const;
  /// Size of the last term relative to the sum.
  double tail(double x) const;
};

/// Phi: rho = kappa, a_0 = (0, N_kappa). Theta: rho = -kappa, a_0 = (1/N_kappa, 0).
/// Throws LogCaseUnsupported when 2 kappa is a nonzero integer.
FrobeniusSeries frobenius_series(double kappa, const TaylorData& taylor, Complex z, SeriesKind kind, int order);

struct RadialOptions {
  int series_order = 20;
  double x_eps = 0.0;  // 0 selects 1e-3 b
  double tol = kDefaultTol;
  Vec2 bc_at_b{0.0, 1.0};
};

/// One stage of a radial problem: the original Frobenius system, or the
/// operator reached after some kappa-lowering steps.
struct RadialSystem {
  double kappa = 0.0;
  PotentialSpec spec;  // the original problem
  WeylData weyl;
  int series_order = 20;
  /// Smallest series/integrator hand-off; the hand-off moves out to the
  /// Taylor radius when the series tail allows.
  double x_eps = 1e-3;
  /// Phi is normalized as x^kappa (0, N_kappa) + o(x^kappa).
  bool normalized = true;
  int stage = 0;
  std::shared_ptr<const TaylorData> taylor;

  const Potential& pot() const { return weyl.pot(); }
  double tol() const { return weyl.tol(); }
};

/// Frobenius series near 0 joined to the integrator at x_eps.
RadialSystem make_radial_system(const PotentialSpec& spec, const RadialOptions& opt = {});
Solution frobenius_phi(const RadialSystem& rs, Complex z);
Solution frobenius_theta(const RadialSystem& rs, Complex z);

/// Least-squares coefficients of `f` on the basis x^e, e in `exponents`.
std::vector<double> power_fit(const std::function<double(double)>& f, const std::vector<double>& exponents,
                              double lo, double hi, int samples = 200);

struct ReductionStep {
  double lambda = 0.0;
  double gamma = 1.0;
  double c = 0.0;            // 1/gamma - W_b(Theta(lambda), dTheta/dz(lambda))
  double wb = 0.0;           // W_b(Theta(lambda), dTheta/dz(lambda))
  double kappa = 0.0;        // before the step
  double kappa_after = 0.0;  // |1 - kappa|
  double fit_s1 = 0.0;       // 1/x coefficient of the sigma1 part, before any gauge
  double fit_s3 = 0.0;       // 1/x coefficient of the sigma3 part
  bool gauged = false;
  bool normalized = false;   // new Phi again x^kappa' (0, N_kappa') + o(x^kappa')
};

struct StepResult {
  RadialSystem next;
  CommutedOperator op;
  ReductionStep record;
};

/// One right commutation from Theta(lambda), followed by the sigma2 gauge
/// when kappa > 1.
StepResult kappa_lower_step(const RadialSystem& rs, double lambda, double gamma);

using Chooser = std::function<std::pair<double, double>(const RadialSystem& stage, int step)>;

/// Smallest zero of M between the first pole >= 0 and the next pole, or the
/// smallest zero in `window` when one is given; gamma fixed.
Chooser default_chooser(double gamma = 1.0, std::optional<std::pair<double, double>> window = std::nullopt);

struct ReductionLedger {
  double kappa = 0.0;  // original
  double b = 1.0;
  std::vector<ReductionStep> steps;
  /// P_n coefficients, lowest degree first; P_0 = {1}.
  std::vector<std::vector<double>> P;
  std::optional<RadialSystem> terminal;

  double recompute_c(std::size_t n) const { return 1.0 / steps[n].gamma - steps[n].wb; }
};

/// Lowers kappa by one per step until kappa < 1/2 (floor(kappa + 1/2) steps),
/// or stops after max_steps when that is >= 0.
ReductionLedger iterate_reduction(const RadialSystem& rs, const Chooser& chooser = default_chooser(),
                                  int max_steps = -1);

/// P_N(z)^2 M_0(z) - sum_n c_n P_n(z)^2 (lambda_n - z).
Complex assemble_M(const ReductionLedger& ledger, Complex z);
/// The same with M_0 supplied (for ledgers read back from JSON).
Complex assemble_M(const ReductionLedger& ledger, Complex z, Complex M0);

Complex polynomial_value(const std::vector<double>& coeffs, Complex z);

std::string ledger_to_json(const ReductionLedger& ledger);
/// Steps and P only; the terminal operator is not serialized.
ReductionLedger ledger_from_json(const std::string& text);

struct FactorizationReport {
  std::vector<double> lambdas;  // common atoms
  std::vector<double> ratios;   // (w / w_0) / P(lambda)^2
  double max_deviation = 0.0;
  std::vector<double> only_terminal;  // atoms of rho_0 with P(lambda) = 0
};

/// Compares weights of the original measure with those of the terminal
/// operator's measure on the window spanned by `original`. Throws
/// AtomMismatch when the atom sets differ by more than the inserted lambda_n.
FactorizationReport measure_factorization_check(const ReductionLedger& ledger, const SpectralMeasureDiscrete& original,
                                                std::size_t n_atoms);

struct NevanlinnaReport {
  int index = -1;
  std::vector<double> exponents;  // growth exponent of the partial-sum increments, per k
  std::size_t atoms = 0;
  std::string note;
};

/// Smallest k with sum w_n / (1 + lambda_n^2)^(k+1) convergent, judged from
/// the growth exponent of the Cauchy differences S_k(2L) - S_k(L).
/// Throws Inconclusive with fewer than 30 atoms or a borderline exponent.
NevanlinnaReport nevanlinna_index(const SpectralMeasureDiscrete& measure, int k_max = 4);

/// Im M(z) / Im z > 0 at every point.
bool herglotz_check(const WeylData& wd, const std::vector<Complex>& points);

}  // namespace dirac
