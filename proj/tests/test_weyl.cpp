#include "doctest.h"

#include <cmath>

#include "dirac/weyl.hpp"

using namespace dirac;

namespace {

const Complex I(0.0, 1.0);

WeylData free_wd(double tol = 1e-11) { return make_weyl_data(build_fundamental_system(free_dirac(), tol)); }

Complex cot(Complex z) { return std::cos(z) / std::sin(z); }

bool close(const Vec2& a, const Vec2& b, double tol) { return (a - b).norm() <= tol; }

PotentialSpec bumpy() {
  PotentialSpec p = free_dirac();
  p.mass = 0.5;
  p.q_el = Coefficient::expression("1 + x");
  p.q_am = Coefficient::expression("sin(3*x)");
  p.q_sc = Coefficient::expression("x^2");
  return p;
}

}  // namespace

TEST_CASE("free fundamental system") {
  const auto fs = build_fundamental_system(free_dirac());
  const Solution phi = fs.phi(2.0);
  const Solution theta = fs.theta(2.0);
  for (double x : {0.0, 0.4, 1.0}) {
    CHECK(close(phi(x), {std::sin(2 * x), std::cos(2 * x)}, 1e-9));
    CHECK(close(theta(x), {std::cos(2 * x), -std::sin(2 * x)}, 1e-9));
    CHECK(close(fs.phi(0.0)(x), {0.0, 1.0}, 1e-15));
    CHECK(close(fs.theta(0.0)(x), {1.0, 0.0}, 1e-15));
  }
  const Complex z(5.0, 3.0);
  for (double x : {0.0, 0.5, 1.0}) CHECK(std::abs(wronskian(fs.theta(z), fs.phi(z), x) - 1.0) < 1e-8);
  CHECK_THROWS_AS(build_fundamental_system(free_radial(0.75)), Error);
}

TEST_CASE("fundamental system reality") {
  const auto fs = build_fundamental_system(bumpy());
  const Complex z(1.3, 0.8);
  for (double x : {0.2, 0.9}) {
    const Vec2 a = fs.phi(z)(x);
    const Vec2 b = fs.phi(std::conj(z))(x);
    CHECK(std::abs(a.u1 - std::conj(b.u1)) + std::abs(a.u2 - std::conj(b.u2)) < 1e-9);
  }
}

TEST_CASE("weyl solution at b") {
  const Potential pot = make_potential(free_dirac());
  const auto up = weyl_solution_plus(pot, {0.0, 1.0})(2.0);
  const auto uq = weyl_solution_plus(pot, {1.0, 0.0})(2.0);
  const auto u0 = weyl_solution_plus(pot, {0.0, 1.0})(0.0);
  for (double x : {0.0, 0.3, 1.0}) {
    CHECK(close(up(x), {std::sin(2 * (x - 1)), std::cos(2 * (x - 1))}, 1e-9));
    CHECK(close(uq(x), {std::cos(2 * (x - 1)), -std::sin(2 * (x - 1))}, 1e-9));
    CHECK(close(u0(x), {0.0, 1.0}, 1e-15));
  }
  CHECK_THROWS_AS(weyl_solution_plus(pot, {0.0, 0.0}), Error);
}

TEST_CASE("free weyl function is -cot z") {
  const auto wd = free_wd();
  CHECK(std::abs(weyl_function(wd, I) - I * (std::cosh(1.0) / std::sinh(1.0))) < 1e-9);
  CHECK(std::abs(weyl_function(wd, I).imag() - 1.3130352854993312) < 1e-9);
  CHECK(std::abs(weyl_function(wd, kPi / 2)) < 1e-9);
  CHECK_THROWS_AS(weyl_function(wd, kPi), Error);
  try {
    weyl_function(wd, kPi);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AtPole);
  }
  for (Complex z : {Complex(0.3, 0.2), Complex(-4.0, 1.0), Complex(7.0, -0.5)}) {
    CHECK(std::abs(weyl_function(wd, z) + cot(z)) < 1e-8 * std::abs(cot(z)));
  }
  // Psi = Theta + M Phi satisfies the boundary condition at b.
  const Solution psi = weyl_psi(wd, Complex(2.0, 1.0));
  CHECK(std::abs(psi(1.0).u1) < 1e-9);
}

TEST_CASE("wronskian quotient does not depend on x") {
  auto wd = make_weyl_data(build_fundamental_system(bumpy()));
  const Complex z(2.0, 0.7);
  const Complex m0 = weyl_function(wd, z);
  for (double x : {0.1, 0.33, 0.9}) {
    wd.x_eval = x;
    CHECK(std::abs(weyl_function(wd, z) - m0) < 1e-8 * std::abs(m0));
  }
}

TEST_CASE("herglotz and conjugation") {
  const auto wd = make_weyl_data(build_fundamental_system(bumpy()));
  for (double re : {-6.0, -1.0, 0.5, 3.0, 9.0}) {
    for (double im : {0.05, 0.5, 3.0}) {
      const Complex z(re, im);
      const Complex m = weyl_function(wd, z);
      CHECK(m.imag() > 0.0);
      CHECK(std::abs(weyl_function(wd, std::conj(z)) - std::conj(m)) <= 1e-8 * std::max(1.0, std::abs(m)));
    }
  }
}

TEST_CASE("free eigenvalues") {
  const auto wd = free_wd();
  const auto e = eigenvalues(wd, -3.5 * kPi, 3.5 * kPi);
  REQUIRE(e.size() == 7);
  for (int n = -3; n <= 3; ++n) CHECK(std::abs(e[static_cast<std::size_t>(n + 3)] - n * kPi) < 1e-10);
  CHECK(eigenvalues(wd, 0.5, 3.0).empty());
  const auto z = eigenvalues(wd, -0.1, 0.1);
  REQUIRE(z.size() == 1);
  CHECK(std::abs(z[0]) < 1e-12);
}

TEST_CASE("poles of M are the eigenvalues") {
  const auto wd = make_weyl_data(build_fundamental_system(bumpy()));
  const auto e = eigenvalues(wd, -8.0, 8.0);
  REQUIRE(e.size() >= 4);
  const auto mu = norming_weights(wd, e);
  for (const auto& a : mu.atoms) {
    // Near a simple pole M ~ -w / (z - lambda).
    const double d = 1e-6;
    const Complex m = weyl_function(wd, a.lambda + d);
    CHECK(std::abs(m * d + a.weight) < 1e-4 * a.weight);
    CHECK(std::abs(a.weight - a.residue_weight) < 1e-7 * a.weight);
  }
}

TEST_CASE("free norming weights") {
  const auto wd = free_wd();
  const auto mu = norming_weights(wd, {-2 * kPi, 0.0, kPi, 3 * kPi});
  REQUIRE(mu.atoms.size() == 4);
  for (const auto& a : mu.atoms) {
    CHECK(std::abs(a.weight - 1.0) < 1e-9);
    CHECK(std::abs(a.residue_weight - 1.0) < 1e-7);
  }
  CHECK_THROWS_AS(norming_weights(wd, {1.0}), Error);
}

TEST_CASE("stieltjes inversion") {
  const auto wd = free_wd(1e-10);
  const auto one = stieltjes_inversion_check(wd, kPi / 2, 3 * kPi / 2);
  CHECK(std::abs(one.value - 1.0) < 1e-3);
  // The atom at pi sits 0.14 beyond the window, so eps must stay below that.
  const auto none = stieltjes_inversion_check(wd, 0.5, 3.0, {0.08, 0.04, 0.02, 0.01});
  CHECK(std::abs(none.value) < 1e-3);
  const auto zero = stieltjes_inversion_check(wd, -0.5, 0.5);
  CHECK(std::abs(zero.value - 1.0) < 1e-3);
  CHECK_THROWS_AS(stieltjes_inversion_check(wd, 1.0, 0.0), Error);
}

TEST_CASE("stieltjes agrees with atoms on a nontrivial potential") {
  const auto wd = make_weyl_data(build_fundamental_system(bumpy(), 1e-10));
  const auto e = eigenvalues(wd, -6.0, 6.0);
  const auto mu = norming_weights(wd, e);
  REQUIRE(e.size() >= 3);
  const double l0 = 0.5 * (e[0] + e[1]);
  const double l1 = 0.5 * (e[1] + e[2]);
  const auto est = stieltjes_inversion_check(wd, l0, l1);
  CHECK(std::abs(est.value - mu.mass_in(l0, l1)) < 1e-3);
}

TEST_CASE("gauge transformations") {
  const auto wd = free_wd();
  const EntireFunction M = [&](Complex z) { return weyl_function(wd, z); };
  const EntireFunction zero = [](Complex) { return Complex(0.0); };
  const EntireFunction ident = [](Complex z) { return z; };
  const EntireFunction ln2 = [](Complex) { return Complex(std::log(2.0)); };
  CHECK(std::abs(gauge_transform_M(M, zero, zero, I) - M(I)) < 1e-14);
  CHECK(std::abs(gauge_transform_M(M, zero, ident, I) - (M(I) + I)) < 1e-14);
  CHECK(std::abs(gauge_transform_M(M, ln2, zero, I) - M(I) / 4.0) < 1e-14);

  // The formula must match M computed directly from the transformed system.
  const EntireFunction g = [](Complex z) { return 0.3 * z; };
  const EntireFunction f = [](Complex z) { return z * z; };
  const WeylData gd = gauge_transform(wd, g, f);
  for (Complex z : {Complex(0.5, 1.0), Complex(-2.0, 0.3), Complex(4.0, 2.0)}) {
    const Complex direct = weyl_function(gd, z);
    CHECK(std::abs(direct - gauge_transform_M(M, g, f, z)) < 1e-8 * std::abs(direct));
    CHECK(std::abs(wronskian(gd.system.theta(z), gd.system.phi(z), 0.4) - 1.0) < 1e-8);
  }
}

TEST_CASE("measure is gauge invariant for g = 0 and polynomial f") {
  const auto wd = make_weyl_data(build_fundamental_system(bumpy()));
  const EntireFunction zero = [](Complex) { return Complex(0.0); };
  const EntireFunction f = [](Complex z) { return 2.0 - z + 0.5 * z * z * z; };
  const WeylData gd = gauge_transform(wd, zero, f);
  const auto e = eigenvalues(wd, -6.0, 6.0);
  const auto eg = eigenvalues(gd, -6.0, 6.0);
  REQUIRE(e.size() == eg.size());
  const auto a = norming_weights(wd, e);
  const auto b = norming_weights(gd, eg);
  for (std::size_t i = 0; i < e.size(); ++i) {
    CHECK(std::abs(e[i] - eg[i]) < 1e-10);
    CHECK(std::abs(a.atoms[i].weight - b.atoms[i].weight) < 1e-9);
    CHECK(std::abs(a.atoms[i].residue_weight - b.atoms[i].residue_weight) < 1e-7);
  }
}

TEST_CASE("magnetic term is a gauge") {
  for (const char* q : {"0", "1.7", "x"}) {
    PotentialSpec p = bumpy();
    p.q_mg = Coefficient::expression(q);
    const auto gauged = eliminate_magnetic(p);
    CHECK_FALSE(gauged.q_mg.has_value());
    const auto direct = eigenvalues(make_weyl_data(build_fundamental_system(p)), -7.0, 7.0);
    const auto plain = eigenvalues(make_weyl_data(build_fundamental_system(gauged)), -7.0, 7.0);
    REQUIRE(direct.size() == plain.size());
    REQUIRE(direct.size() >= 3);
    for (std::size_t i = 0; i < direct.size(); ++i) CHECK(std::abs(direct[i] - plain[i]) < 1e-8);

    // Gamma * (solution without q_mg) solves the magnetic system.
    const auto phase = magnetic_phase(p);
    const Complex z(1.1, 0.4);
    const Solution u = build_fundamental_system(gauged).phi(z);
    const Solution v = build_fundamental_system(p).phi(z);
    for (double x : {0.3, 1.0}) CHECK(close(phase(x) * u(x), v(x), 1e-8));
  }
}

TEST_CASE("non-integrable magnetic coefficient is rejected") {
  PotentialSpec p = free_dirac();
  p.q_mg = Coefficient::function([](double x) { return 1.0 / (x * x); });
  CHECK_THROWS_AS(eliminate_magnetic(p), Error);
}
