#include "doctest.h"

#include <cmath>

#include "dirac/commute.hpp"

using namespace dirac;

namespace {

const Complex I(0.0, 1.0);

WeylData free_wd(double tol = 1e-11) { return make_weyl_data(build_fundamental_system(free_dirac(), tol)); }

Complex cot(Complex z) { return std::cos(z) / std::sin(z); }

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

const std::vector<Complex> kTestZ = {I,        2.0 + I,  -1.0 + 0.5 * I, 0.3 + 2.0 * I, 5.0 * I,
                                     4.0 - I,  -3.0 - 2.0 * I, 1.5 + 0.1 * I, 7.0 + 3.0 * I, -6.0 + I};

}  // namespace

TEST_CASE("commuted potential for lambda = pi, gamma = 1") {
  const auto op = commute_left_phi(free_wd(), kPi, 1.0);
  for (double x : {0.0, 0.1, 0.37, 0.8, 1.0}) {
    const double s = std::sin(kPi * x);
    const double c = std::cos(kPi * x);
    CHECK(op.c(x) == doctest::Approx(1.0 + x).epsilon(1e-9));
    const PauliTerms q = commuted_terms(op.c, x);
    CHECK(q.s1 == doctest::Approx((s * s - c * c) / (1.0 + x)).epsilon(1e-9));
    CHECK(q.s3 == doctest::Approx(-2.0 * s * c / (1.0 + x)).epsilon(1e-9));
    CHECK(q.el == 0.0);
    CHECK(q.mg == 0.0);
    const PauliTerms full = op.pot.terms(x);
    CHECK(full.s1 == doctest::Approx(q.s1).epsilon(1e-12));
  }
}

TEST_CASE("gamma = 0 leaves the operator alone") {
  const auto wd = free_wd();
  const auto op = commute_left_phi(wd, kPi, 0.0);
  CHECK(op.trivial);
  for (Complex z : {I, 2.0 + I}) CHECK(std::abs(op.M_formula(z) - weyl_function(wd, z)) < 1e-14);
}

TEST_CASE("transformed solution solves the commuted equation") {
  const auto wd = free_wd();
  const auto op = commute_left_phi(wd, kPi, 1.0);
  for (Complex z : {2.0 + I, Complex(0.7), -4.0 + 0.2 * I}) {
    const Solution v = transform_solution(wd.system.phi(z), op.c);
    const auto direct = integrate(op.pot, z, 0.0, v(0.0), 1.0, 1e-11);
    double worst = 0.0;
    for (int k = 0; k <= 40; ++k) {
      const double x = k / 40.0;
      worst = std::max(worst, (v(x) - direct(x)).norm());
    }
    CHECK(worst <= 1e-8);
  }
  CHECK_THROWS_AS(transform_solution(wd.system.phi(kPi), op.c), Error);
}

TEST_CASE("wronskian identity for transformed pairs") {
  const auto wd = free_wd();
  const double lambda = kPi;
  const auto op = commute_left_phi(wd, lambda, 1.0);
  const Solution ref = wd.system.phi(lambda);
  double worst = 0.0;
  for (Complex z : {2.0 + I, -1.0 + 0.5 * I, 4.0 + 2.0 * I}) {
    for (Complex zh : {Complex(3.0), 0.5 - I, -2.0 + 3.0 * I}) {
      const Solution u = wd.system.phi(z);
      const Solution uh = wd.system.theta(zh);
      const Solution v = transform_solution(u, op.c);
      const Solution vh = transform_solution(uh, op.c);
      for (double x : {0.25, 0.5, 0.75}) {
        const Complex wu = wronskian(ref(x), u(x));
        const Complex wuh = wronskian(ref(x), uh(x));
        const Complex rhs =
            wronskian(u(x), uh(x)) - (1.0 / op.c(x)) * (z - zh) / ((z - lambda) * (zh - lambda)) * wu * wuh;
        worst = std::max(worst, std::abs(wronskian(v(x), vh(x)) - rhs));
      }
    }
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("finite gamma map against the commuted operator") {
  const auto op = commute_left_phi(free_wd(), kPi, 1.0);
  const WeylData direct = direct_weyl_data(op);
  CHECK(std::abs(op.M_formula(I) - (-cot(I) - 1.0 / (I - kPi))) < 1e-8);
  for (Complex z : kTestZ) {
    const Complex oracle = -cot(z) - 1.0 / (z - kPi);
    CHECK(rel(op.M_formula(z), oracle) < 1e-8);
    CHECK(rel(weyl_function(direct, z), oracle) < 1e-6);
    CHECK(rel(weyl_function(op.weyl, z), oracle) < 1e-6);
  }
}

TEST_CASE("commuted fundamental system") {
  const auto op = commute_left_phi(free_wd(), kPi, 0.7);
  const auto& fs = op.weyl.system;
  for (Complex z : {2.0 + I, Complex(1.1), Complex(kPi)}) {
    for (double x : {0.0, 0.4, 0.9}) CHECK(std::abs(wronskian(fs.theta(z), fs.phi(z), x) - 1.0) < 1e-8);
  }
  // the lambda limits solve the commuted equation
  for (const auto& fam : {fs.phi, fs.theta}) {
    const Solution u = fam(kPi);
    const auto direct = integrate(op.pot, kPi, 0.0, u(0.0), 1.0, 1e-11);
    for (double x : {0.3, 0.6, 1.0}) CHECK((u(x) - direct(x)).norm() < 1e-7);
  }
  // and join continuously onto nearby z
  const Solution at = fs.theta(kPi);
  const Solution near = fs.theta(kPi + 1e-5);
  CHECK((at(0.7) - near(0.7)).norm() < 1e-4);
}

TEST_CASE("spectrum bookkeeping, interior gamma") {
  const auto wd = free_wd();
  const auto before = eigenvalues(wd, -10.0, 10.0);
  REQUIRE(before.size() == 7);
  const CommutationParams params{kPi, 1.0, Side::left_from_phi};
  const auto predicted = spectral_bookkeeping(before, params, true, 1.0);
  const auto op = commute(wd, params);
  const auto after = eigenvalues(direct_weyl_data(op), -10.0, 10.0);
  REQUIRE(after.size() == predicted.size());
  for (std::size_t i = 0; i < after.size(); ++i) CHECK(std::abs(after[i] - predicted[i]) < 1e-8);
}

TEST_CASE("spectrum bookkeeping, removal at the lower gamma bound") {
  const auto wd = free_wd();
  const auto before = eigenvalues(wd, -10.0, 10.0);
  const CommutationParams params{kPi, -1.0, Side::left_from_phi};
  const auto predicted = spectral_bookkeeping(before, params, true, 1.0);
  REQUIRE(predicted.size() == 6);
  for (double e : predicted) CHECK(std::abs(e - kPi) > 1.0);
  const auto op = commute(wd, params);
  CHECK(op.c.vanishes_at_b);
  CHECK(op.pot.singular_b);
  const auto after = eigenvalues(direct_weyl_data(op), -10.0, 10.0);
  REQUIRE(after.size() == predicted.size());
  for (std::size_t i = 0; i < after.size(); ++i) CHECK(std::abs(after[i] - predicted[i]) < 1e-8);
  for (Complex z : {I, 2.0 + I, 5.0 * I}) CHECK(rel(op.M_formula(z), weyl_function(direct_weyl_data(op), z)) < 1e-6);
  // -cot z + 1/(z - pi) -> 0: no pole left at pi
  CHECK(std::abs(weyl_function(direct_weyl_data(op), kPi)) < 1e-5);
}

TEST_CASE("bookkeeping cases") {
  const std::vector<double> eigs = {-kPi, 0.0, kPi};
  CHECK(spectral_bookkeeping(eigs, {kPi, 0.0, Side::left_from_phi}, true, 1.0) == eigs);
  CHECK(spectral_bookkeeping(eigs, {0.0, kInf, Side::left_from_phi}, true, 1.0) == std::vector<double>{-kPi, kPi});
  CHECK(spectral_bookkeeping(eigs, {1.0, 2.0, Side::right_from_theta}, false) ==
        std::vector<double>{-kPi, 0.0, 1.0, kPi});
  CHECK(spectral_bookkeeping(eigs, {1.0, kInf, Side::right_from_theta}, false) == eigs);
  CHECK_THROWS_AS(spectral_bookkeeping(eigs, {1.0, 2.0, Side::left_from_phi}, true, 1.0), Error);
  CHECK_THROWS_AS(spectral_bookkeeping(eigs, {kPi, -2.0, Side::left_from_phi}, true, 1.0), Error);
}

TEST_CASE("invalid parameters") {
  const auto wd = free_wd();
  auto kind = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::TaskError;
  };
  CHECK(kind([&] { commute_left_phi(wd, kPi, -2.0); }) == ErrorKind::InvalidGamma);
  CHECK(kind([&] { commute_left_phi(wd, 3.0, 1.0); }) == ErrorKind::LambdaNotEigenvalue);
  CHECK(kind([&] { commute_left_phi_infinite(wd, 1.0); }) == ErrorKind::LambdaNotEigenvalue);
  CHECK(kind([&] { commute_right_theta(wd, kPi / 2, 1.0); }) == ErrorKind::ThetaSquareIntegrable);
  CHECK(kind([&] { commute_right_theta(wd, kPi / 2, -1.0); }) == ErrorKind::InvalidGamma);
}

TEST_CASE("infinite gamma") {
  const auto wd = free_wd();
  const auto op = commute_left_phi_infinite(wd, 0.0);
  CHECK(op.pot.singular_a);
  for (Complex z : kTestZ) {
    const Complex oracle = -z * z * cot(z);
    CHECK(rel(op.M_formula(z), oracle) < 1e-8);
    CHECK(rel(weyl_function(direct_weyl_data(op), z), oracle) < 1e-6);
  }
  CHECK(std::abs(op.M_formula(1e-4)) <= 1e-4);
  CHECK(std::abs(weyl_function(op.weyl, 0.05 * I) - (-0.05 * I * 0.05 * I * cot(0.05 * I))) < 1e-6);
  CHECK(eigenvalues(op.weyl, -0.5, 0.5).empty());
  const auto far = eigenvalues(op.weyl, -7.0, 7.0);
  REQUIRE(far.size() == 4);
  CHECK(std::abs(far[1] + kPi) < 1e-8);
  CHECK(std::abs(far[2] - kPi) < 1e-8);
  const auto& fs = op.weyl.system;
  for (Complex z : {2.0 + I, Complex(0.0)}) {
    for (double x : {0.3, 0.8}) CHECK(std::abs(wronskian(fs.theta(z), fs.phi(z), x) - 1.0) < 1e-8);
  }
  // Theta_inf(lambda) = -Phi~_inf(lambda)
  const Solution th = fs.theta(0.0);
  for (double x : {0.3, 0.8}) CHECK((th(x) + op.c.ref(x) / op.c(x)).norm() < 1e-12);
}

TEST_CASE("right commutation from Theta on a closed-form M") {
  // Free Dirac with the square-integrability requirement lifted, so that the
  // formulas can be checked against -cot; W_b(Theta, dTheta/dz) = -1 there.
  WeylData wd = free_wd();
  wd.system.theta_in_h = false;
  const double lambda = kPi / 2;
  const auto op = commute_right_theta(wd, lambda, 1.0);
  CHECK(op.wb_theta_dot == doctest::Approx(-1.0).epsilon(1e-9));
  for (double x : {0.0, 0.5, 1.0}) CHECK(op.c(x) == doctest::Approx(-1.0 - (1.0 - x)).epsilon(1e-9));
  for (Complex z : kTestZ) {
    const Complex d = z - lambda;
    const Complex oracle = (-cot(z) - d) / (d * d) - 1.0 / d;
    CHECK(rel(op.M_formula(z), oracle) < 1e-8);
    CHECK(rel(weyl_function(op.weyl, z), oracle) < 1e-6);
  }
  const Complex res = contour_residue([&](Complex z) { return op.M_formula(z); }, lambda);
  CHECK(std::abs(res + 1.0) < 1e-6);
  for (int k = 2; k <= 5; ++k) {
    const Complex d = std::pow(10.0, -k);
    CHECK(std::abs((weyl_function(wd, lambda + d) + op.wb_theta_dot * d) / (d * d)) < 10.0);
  }
  // Phi_gamma(lambda) carries the boundary condition at b
  const Solution pl = op.weyl.system.phi(lambda);
  const Solution ul = op.weyl.uplus(lambda);
  CHECK(std::abs(wronskian(pl, ul, 1.0)) < 1e-9 * pl(1.0).norm() * ul(1.0).norm());
  CHECK_THROWS_AS(op.weyl.system.theta(lambda), Error);

  const auto inf = commute_right_theta(wd, lambda, kInf);
  CHECK(inf.pot.singular_b);
  for (Complex z : {I, 2.0 + I}) {
    const Complex d = z - lambda;
    CHECK(rel(weyl_function(inf.weyl, z), (-cot(z) - d) / (d * d)) < 1e-6);
  }
  CHECK_THROWS_AS(commute_right_theta(wd, 1.0, 1.0), Error);
}

TEST_CASE("right commutation from Phi reuses the left construction") {
  const auto wd = free_wd();
  const auto op = commute_right_phi(wd, kPi, 1.0);
  // -1/gamma - int_x^b Phi^T Phi with ||Phi(pi)|| = 1
  for (double x : {0.0, 0.5, 1.0}) CHECK(op.c(x) == doctest::Approx(x - 2.0).epsilon(1e-9));
  CHECK(op.params.side == Side::right_from_phi);
  for (Complex z : {I, 2.0 + I, 5.0 * I}) {
    CHECK(rel(op.M_formula(z), -cot(z) + 0.5 / (z - kPi)) < 1e-8);
    CHECK(rel(weyl_function(direct_weyl_data(op), z), op.M_formula(z)) < 1e-6);
  }
}

TEST_CASE("admissible lambdas for a right step") {
  const auto wd = free_wd();
  const auto z = admissible_lambda_right(wd, 0.0, 2 * kPi);
  REQUIRE(z.size() == 2);
  CHECK(std::abs(z[0] - kPi / 2) < 1e-10);
  CHECK(std::abs(z[1] - 3 * kPi / 2) < 1e-10);
  CHECK(admissible_lambda_right(wd, 0.1, 0.2).empty());
}

TEST_CASE("contour residue") {
  const Complex r = contour_residue([](Complex z) { return 2.5 / (z - 1.0) + z * z; }, 1.0);
  CHECK(std::abs(r - 2.5) < 1e-12);
  CHECK(std::abs(contour_residue([](Complex z) { return -cot(z); }, 0.0) + 1.0) < 1e-12);
}
