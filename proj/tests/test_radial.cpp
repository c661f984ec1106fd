#include "doctest.h"

#include <cmath>

#include <boost/math/special_functions/bessel.hpp>

#include "dirac/radial.hpp"

using namespace dirac;
using boost::math::cyl_bessel_j;

namespace {

const Complex I(0.0, 1.0);

// Free radial solutions for real z > 0.
Vec2 bessel_phi(double kappa, double z, double x) {
  const double f = std::pow(z, -kappa) * std::sqrt(kPi * z * x / 2.0);
  return {f * cyl_bessel_j(kappa + 0.5, z * x), f * cyl_bessel_j(kappa - 0.5, z * x)};
}

Vec2 bessel_theta(double kappa, double z, double x) {
  const double d = std::pow(z, kappa + 0.5) * std::sqrt(kPi / 2.0) / std::cos(kPi * kappa);
  return {d * std::sqrt(x) * cyl_bessel_j(-kappa - 0.5, z * x), -d * std::sqrt(x) * cyl_bessel_j(0.5 - kappa, z * x)};
}

double rel_diff(const Vec2& a, const Vec2& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::TaskError;
}

PotentialSpec perturbed(double kappa) {
  PotentialSpec p = free_radial(kappa);
  p.mass = 0.5;
  p.q_el = Coefficient::expression("1 + x");
  p.q_am = Coefficient::expression("sin(3*x)");
  p.q_sc = Coefficient::expression("x^2");
  return p;
}

}  // namespace

TEST_CASE("normalization constant") {
  CHECK(frobenius_norm_constant(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(frobenius_norm_constant(0.5) == doctest::Approx(std::sqrt(kPi / 2.0)).epsilon(1e-14));
  CHECK(frobenius_norm_constant(1.5) == doctest::Approx(std::sqrt(kPi) / (2.0 * std::sqrt(2.0))).epsilon(1e-14));
}

TEST_CASE("kappa = 0 is the free system") {
  const auto rs = make_radial_system(free_radial(0.0), {20, 0.0, 1e-11});
  for (double x : {0.0005, 0.1, 0.5, 1.0}) {
    CHECK(rel_diff(frobenius_phi(rs, 2.0)(x), {std::sin(2 * x), std::cos(2 * x)}) < 1e-9);
    CHECK(rel_diff(frobenius_theta(rs, 2.0)(x), {std::cos(2 * x), -std::sin(2 * x)}) < 1e-9);
  }
}

TEST_CASE("bessel oracle") {
  for (double kappa : {0.25, 0.75, 1.3}) {
    const auto rs = make_radial_system(free_radial(kappa), {20, 0.0, 1e-11});
    for (double z : {1.0, 3.7, 12.0}) {
      const Solution phi = rs.weyl.system.phi(z);
      const Solution theta = rs.weyl.system.theta(z);
      double worst = 0.0;
      for (int k = 0; k <= 38; ++k) {
        const double x = 0.05 + k * 0.025;
        worst = std::max(worst, rel_diff(phi(x), bessel_phi(kappa, z, x)));
        worst = std::max(worst, rel_diff(theta(x), bessel_theta(kappa, z, x)));
      }
      CHECK(worst < 1e-8);
    }
  }
}

TEST_CASE("frobenius wronskian and leading behaviour") {
  const auto rs = make_radial_system(free_radial(0.75), {20, 0.0, 1e-11});
  for (Complex z : {Complex(1.0), 2.0 + 3.0 * I, -7.0 + 0.5 * I}) {
    const Solution phi = frobenius_phi(rs, z);
    const Solution theta = frobenius_theta(rs, z);
    for (double x : {rs.x_eps, 0.5, 1.0}) CHECK(std::abs(wronskian(theta, phi, x) - 1.0) < 1e-8);
    const double x = 1e-5;
    const double n = frobenius_norm_constant(0.75);
    CHECK(std::abs(phi(x).u2 / std::pow(x, 0.75) - n) < 1e-6);
    CHECK(std::abs(phi(x).u1) < std::abs(z) * x * std::pow(x, 0.75));
    CHECK(std::abs(theta(x).u1 * std::pow(x, 0.75) - 1.0 / n) < 1e-6);
  }
}

TEST_CASE("series and integration agree past the hand-off") {
  const PotentialSpec spec = perturbed(0.75);
  const auto rs = make_radial_system(spec, {20, 0.0, 1e-11});
  const double xe = rs.x_eps;
  for (Complex z : {Complex(1.5), 3.0 + I}) {
    for (SeriesKind kind : {SeriesKind::phi, SeriesKind::theta}) {
      const FrobeniusSeries s = frobenius_series(0.75, *rs.taylor, z, kind, 20);
      const Solution u = kind == SeriesKind::phi ? frobenius_phi(rs, z) : frobenius_theta(rs, z);
      CHECK(rel_diff(u(2.0 * xe), s(2.0 * xe)) < 1e-8);
      CHECK(std::abs(u.gram(2.0 * xe) - s.gram(2.0 * xe)) < 1e-8 * std::max(1.0, std::abs(s.gram(2.0 * xe))));
    }
    CHECK(std::abs(wronskian(frobenius_theta(rs, z), frobenius_phi(rs, z), 0.8) - 1.0) < 1e-8);
  }
}

TEST_CASE("theta integrability profile") {
  const auto rs = make_radial_system(free_radial(0.75), {20, 0.0, 1e-11});
  const Solution theta = frobenius_theta(rs, 1.0);
  std::vector<double> w;
  for (double x : {1e-2, 1e-3, 1e-4}) w.push_back(std::pow(x, 0.5) * (theta.gram(0.5) - theta.gram(x)).real());
  CHECK(w[2] > 0.0);
  CHECK(std::abs(w[2] - w[1]) < std::abs(w[1] - w[0]));
  // limit is N^-2 / (2 kappa - 1)
  const double n = frobenius_norm_constant(0.75);
  CHECK(w[2] == doctest::Approx(1.0 / (n * n * 0.5)).epsilon(2e-2));
}

TEST_CASE("growth along the imaginary axis") {
  const auto rs = make_radial_system(free_radial(0.75), {20, 0.0, 1e-11});
  double lo = kInf;
  double hi = 0.0;
  for (double y = 10.0; y <= 100.0; y += 10.0) {
    const double v = frobenius_phi(rs, I * y)(0.5).norm() * std::pow(y, 0.75) * std::exp(-0.5 * y);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi / lo <= 3.0);
}

namespace {

// distance of z^kappa Phi(z, x) from the WKB form, worst over x
double sector_error(double kappa, double z) {
  PotentialSpec spec = free_radial(kappa);
  spec.q_el = Coefficient::expression("1 + x");
  const auto rs = make_radial_system(spec, {20, 0.0, 1e-11});
  const Solution phi = frobenius_phi(rs, z);
  double worst = 0.0;
  for (double x : {0.5, 1.0}) {
    const double ph = z * x - kappa * kPi / 2 - (x + x * x / 2);
    const Vec2 v = phi(x) * Complex(std::pow(z, kappa));
    worst = std::max(worst, (v - Vec2(std::sin(ph), std::cos(ph))).norm());
  }
  return worst;
}

}  // namespace

TEST_CASE("sector asymptotics with an electric term") {
  for (double z : {60.0, 80.0, 100.0}) CHECK(sector_error(0.25, z) < 1e-2);
  // first correction is (4 nu^2 - 1) / (8 z x), nu = kappa + 1/2
  const double e60 = sector_error(0.75, 60.0);
  const double e120 = sector_error(0.75, 120.0);
  CHECK(e60 < 5e-2);
  CHECK(e120 < 0.6 * e60);
}

TEST_CASE("radial errors") {
  CHECK(kind_of([] { make_radial_system(free_radial(0.5)); }) == ErrorKind::LogCaseUnsupported);
  CHECK(kind_of([] { make_radial_system(free_radial(1.0)); }) == ErrorKind::LogCaseUnsupported);
  PotentialSpec rough = free_radial(0.75);
  rough.q_am = Coefficient::table({0.0, 5e-4, 1.0}, {0.0, 1.0, 0.0});
  CHECK(kind_of([&] { make_radial_system(rough); }) == ErrorKind::SeriesDivergence);
  CHECK(kind_of([] { make_radial_system(free_dirac()); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("free radial eigenvalues are Bessel zeros") {
  const auto rs = make_radial_system(free_radial(0.75), {20, 0.0, 1e-11});
  const auto eigs = eigenvalues(rs.weyl, -0.3, 15.0);
  REQUIRE(eigs.size() == 5);
  CHECK(std::abs(eigs[0]) < 1e-9);
  for (int n = 1; n <= 4; ++n) CHECK(std::abs(eigs[n] - boost::math::cyl_bessel_j_zero(1.25, n)) < 1e-8);
  const auto m = norming_weights(rs.weyl, eigs);
  for (const Atom& a : m.atoms) CHECK(std::abs(a.weight / a.residue_weight - 1.0) < 1e-6);
}

TEST_CASE("right commutation on a radial operator") {
  const auto rs = make_radial_system(free_radial(0.75), {20, 0.0, 1e-11});
  const auto zeros = admissible_lambda_right(rs.weyl, 0.1, 6.0);
  REQUIRE(!zeros.empty());
  const double lambda = zeros.front();
  // zeros of M are zeros of J_{-1.25}
  CHECK(std::abs(cyl_bessel_j(-1.25, lambda)) < 1e-9);
  const auto op = commute_right_theta(rs.weyl, lambda, 1.0);
  for (Complex z : {I, 2.0 + I, 5.0 * I}) {
    CHECK(std::abs(weyl_function(op.weyl, z) - op.M_formula(z)) < 1e-6 * std::abs(op.M_formula(z)));
  }
  const Complex res = contour_residue([&](Complex z) { return weyl_function(op.weyl, z); }, lambda);
  CHECK(std::abs(res + 1.0) < 1e-6);
  CHECK(kind_of([&] { commute_right_theta(rs.weyl, lambda + 0.3, 1.0); }) == ErrorKind::LambdaNotAdmissible);
  const auto small = make_radial_system(free_radial(0.25));
  CHECK(kind_of([&] { commute_right_theta(small.weyl, 1.0, 1.0); }) == ErrorKind::ThetaSquareIntegrable);
}

TEST_CASE("kappa lowering at 1.3") {
  const auto rs = make_radial_system(free_radial(1.3), {20, 0.0, 1e-11});
  const auto [lambda, gamma] = default_chooser()(rs, 0);
  CHECK(gamma == 1.0);
  CHECK(std::abs(cyl_bessel_j(-1.8, lambda)) < 1e-9);
  const auto r = kappa_lower_step(rs, lambda, gamma);
  CHECK(std::abs(r.record.fit_s1 + 0.3) < 1e-3);
  CHECK(std::abs(r.record.fit_s3) < 1e-3);
  CHECK(r.record.gauged);
  CHECK(r.record.normalized);
  CHECK(r.next.kappa == doctest::Approx(0.3));
  const Potential& p = r.next.pot();
  const double after = power_fit([&p](double x) { return x * p.terms(x).s1; }, {0.0, 1.6, 3.2, 1.0, 2.6, 2.0}, 1e-3,
                                 1e-1)[0];
  CHECK(std::abs(after - 0.3) < 1e-3);
  for (Complex z : {2.0 + I, Complex(1.0)}) {
    CHECK(std::abs(wronskian(r.next.weyl.system.theta(z), r.next.weyl.system.phi(z), 0.6) - 1.0) < 1e-8);
  }
  CHECK(kind_of([&] { kappa_lower_step(r.next, 1.0, 1.0); }) == ErrorKind::KappaTooSmall);
}

TEST_CASE("kappa lowering at 0.75 keeps the sign") {
  const auto rs = make_radial_system(free_radial(0.75), {20, 0.0, 1e-11});
  const auto [lambda, gamma] = default_chooser()(rs, 0);
  const auto r = kappa_lower_step(rs, lambda, gamma);
  CHECK(std::abs(r.record.fit_s1 - 0.25) < 1e-3);
  CHECK(!r.record.gauged);
  CHECK(!r.record.normalized);
  CHECK(r.next.kappa == doctest::Approx(0.25));
  CHECK(r.next.weyl.system.theta_in_h);
}

TEST_CASE("reduction ledger") {
  const auto rs = make_radial_system(free_radial(0.75), {20, 0.0, 1e-11});
  const auto ledger = iterate_reduction(rs);
  REQUIRE(ledger.steps.size() == 1);
  const auto& s = ledger.steps[0];
  CHECK(std::abs(ledger.recompute_c(0) - s.c) < 1e-12);
  CHECK(ledger.P[1] == std::vector<double>{-s.lambda, 1.0});
  for (Complex z : {I, 3.0 + 2.0 * I, -2.0 + 0.5 * I}) {
    const Complex m = weyl_function(rs.weyl, z);
    CHECK(std::abs(assemble_M(ledger, z) - m) < 1e-7 * std::abs(m));
  }
  std::vector<Complex> pts;
  for (int k = 0; k < 20; ++k) pts.push_back(Complex(-10.0 + k, 0.2 + 0.3 * (k % 4)) * (k % 2 ? 1.0 : -1.0));
  CHECK(herglotz_check(ledger.terminal->weyl, pts));

  const auto back = ledger_from_json(ledger_to_json(ledger));
  REQUIRE(back.steps.size() == 1);
  CHECK(std::abs(back.steps[0].lambda - s.lambda) <= 1e-12 * std::abs(s.lambda));
  CHECK(std::abs(back.steps[0].c - s.c) <= 1e-12 * std::abs(s.c));
  CHECK(back.P == ledger.P);
  const Complex z(1.0, 1.0);
  const Complex m0 = weyl_function(ledger.terminal->weyl, z);
  CHECK(std::abs(assemble_M(back, z, m0) - assemble_M(ledger, z)) < 1e-12 * std::abs(assemble_M(ledger, z)));
  CHECK(kind_of([] { ledger_from_json("{\"kappa\": 1}"); }) == ErrorKind::ParseError);
}

TEST_CASE("empty ledger below one half") {
  const auto rs = make_radial_system(free_radial(0.3));
  const auto ledger = iterate_reduction(rs);
  CHECK(ledger.steps.empty());
  CHECK(ledger.P.size() == 1);
  CHECK(std::abs(assemble_M(ledger, 2.0 + I) - weyl_function(rs.weyl, 2.0 + I)) < 1e-14);
}

TEST_CASE("two lowering steps from 2.3") {
  const auto rs = make_radial_system(free_radial(2.3), {20, 0.0, 1e-11});
  const auto ledger = iterate_reduction(rs);
  REQUIRE(ledger.steps.size() == 2);
  CHECK(ledger.steps[0].kappa_after == doctest::Approx(1.3));
  CHECK(ledger.steps[1].kappa_after == doctest::Approx(0.3));
  CHECK(ledger.terminal->kappa == doctest::Approx(0.3));
  for (Complex z : {I, 3.0 + 2.0 * I}) {
    const Complex m = weyl_function(rs.weyl, z);
    CHECK(std::abs(assemble_M(ledger, z) - m) < 1e-6 * std::abs(m));
  }
}

TEST_CASE("measure factorization with one step") {
  const auto rs = make_radial_system(free_radial(0.75), {20, 0.0, 1e-11});
  const auto ledger = iterate_reduction(rs);
  const auto rho = norming_weights(rs.weyl, eigenvalues(rs.weyl, -40.0, 40.0));
  const auto rep = measure_factorization_check(ledger, rho, 10);
  CHECK(rep.lambdas.size() >= 10);
  CHECK(rep.max_deviation < 1e-5);
  REQUIRE(rep.only_terminal.size() == 1);
  CHECK(std::abs(rep.only_terminal[0] - ledger.steps[0].lambda) < 1e-7);
}

TEST_CASE("factorization with a far lowering point") {
  PotentialSpec spec = free_radial(1.3);
  spec.mass = 0.5;
  spec.q_el = Coefficient::expression("1 + x");
  spec.q_am = Coefficient::expression("sin(3*x)");
  const auto rs = make_radial_system(spec, {20, 0.0, 1e-10});
  const auto ledger = iterate_reduction(rs, default_chooser(1.0, std::pair{-15.0, 15.0}));
  REQUIRE(ledger.steps.size() == 1);
  CHECK(ledger.steps[0].lambda < -13.0);
  const auto rho = norming_weights(rs.weyl, eigenvalues(rs.weyl, -40.0, 40.0));
  const auto rep = measure_factorization_check(ledger, rho, 10);
  CHECK(rep.max_deviation < 1e-5);
  REQUIRE(rep.only_terminal.size() == 1);
  // the new eigenvalue is only good to ~tol |lambda|^k
  CHECK(std::abs(rep.only_terminal[0] - ledger.steps[0].lambda) < 1e-5 * std::abs(ledger.steps[0].lambda));
}

TEST_CASE("nevanlinna index on synthetic measures") {
  SpectralMeasureDiscrete unit;
  SpectralMeasureDiscrete squared;
  for (int n = -30; n <= 30; ++n) {
    const double l = n * kPi;
    unit.atoms.push_back({l, 1.0, 1.0});
    squared.atoms.push_back({l, 1.0 + l * l, 1.0 + l * l});
  }
  CHECK(nevanlinna_index(unit).index == 0);
  CHECK(nevanlinna_index(squared).index == 1);
  CHECK(kind_of([] { nevanlinna_index(SpectralMeasureDiscrete{}); }) == ErrorKind::Inconclusive);
  SpectralMeasureDiscrete border;  // weights ~ |lambda|: sum of 1/n, borderline
  for (int n = 1; n <= 60; ++n) border.atoms.push_back({n * kPi, n * kPi, 0.0});
  CHECK(kind_of([&] { nevanlinna_index(border); }) == ErrorKind::Inconclusive);
}

TEST_CASE("moment index of free radial measures") {
  for (auto [kappa, expect] : {std::pair{0.3, 0}, std::pair{1.3, 1}, std::pair{2.3, 2}}) {
    const auto rs = make_radial_system(free_radial(kappa), {20, 0.0, 1e-11});
    const auto rho = norming_weights(rs.weyl, eigenvalues(rs.weyl, -60.0, 60.0));
    const auto rep = nevanlinna_index(rho);
    CHECK(rep.index == expect);
    // weights grow like |lambda|^(2 kappa), one atom per pi
    CHECK(std::abs(rep.exponents.back() - (2 * kappa - 2 * expect - 1)) < 0.1);
  }
}
