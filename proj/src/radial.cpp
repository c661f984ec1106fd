#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <json.hpp>

#include "dirac/radial.hpp"

namespace dirac {

std::vector<double> power_fit(const std::function<double(double)>& f, const std::vector<double>& exponents,
                              double lo, double hi, int samples) {
  if (!(lo > 0.0) || !(lo < hi) || exponents.empty()) {
    throw Error(ErrorKind::InvalidArgument, "power_fit needs 0 < lo < hi and a basis");
  }
  const auto m = static_cast<Eigen::Index>(samples);
  const auto n = static_cast<Eigen::Index>(exponents.size());
  Eigen::MatrixXd A(m, n);
  Eigen::VectorXd y(m);
  // log-spaced samples, scaled basis columns
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(m - 1));
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = std::pow(x / hi, exponents[static_cast<std::size_t>(j)]);
    y(i) = f(x);
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
  std::vector<double> out(exponents.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    out[static_cast<std::size_t>(j)] = c(j) / std::pow(hi, exponents[static_cast<std::size_t>(j)]);
  }
  return out;
}

namespace {

Solution rotated(const Solution& u) {
  Solution s = u;
  s.trace.reset();
  s.eval = [f = u.eval](double x) { return i_sigma2(f(x)); };
  return s;  // (i sigma2 u)^T (i sigma2 u) = u^T u, so the gram carries over
}

SolutionFamily rotated(const SolutionFamily& fam) {
  return [fam](Complex z) { return rotated(fam(z)); };
}

std::vector<double> fit_exponents(double kappa) {
  const double p = 2.0 * kappa - 1.0;
  // x s1 is a series in x^p and x; keep every k p + j up to 3
  std::vector<double> e;
  for (int k = 0; k * p <= 3.0; ++k) {
    for (int j = 0; k * p + j <= 3.0; ++j) {
      const double v = k * p + j;
      if (std::none_of(e.begin(), e.end(), [v](double w) { return std::abs(v - w) < 1e-6; })) e.push_back(v);
    }
  }
  return e;
}

}  // namespace

StepResult kappa_lower_step(const RadialSystem& rs, double lambda, double gamma) {
  const double kappa = rs.kappa;
  if (!(kappa > 0.5)) {
    throw Error(ErrorKind::KappaTooSmall, "kappa = " + std::to_string(kappa) + " is already limit circle");
  }
  if (!std::isfinite(gamma)) throw Error(ErrorKind::InvalidGamma, "a lowering step needs finite gamma");
  StepResult res{rs, commute_right_theta(rs.weyl, lambda, gamma), {}};
  const CommutedOperator& op = res.op;
  ReductionStep& rec = res.record;
  rec.lambda = lambda;
  rec.gamma = gamma;
  rec.wb = op.wb_theta_dot;
  rec.c = 1.0 / gamma - rec.wb;
  rec.kappa = kappa;
  rec.kappa_after = std::abs(1.0 - kappa);

  const double b = rs.pot().b;
  const Potential& pg = op.pot;
  const auto exps = fit_exponents(kappa);
  // x^(2 kappa - 1) corrections decay too slowly on [1e-3, 1e-1] when kappa < 1
  const double lo = kappa > 1.0 ? 1e-3 * b : 1e-6 * b;
  const double hi = kappa > 1.0 ? 1e-1 * b : 1e-3 * b;
  rec.fit_s1 = power_fit([&pg](double x) { return x * pg.terms(x).s1; }, exps, lo, hi)[0];
  rec.fit_s3 = power_fit([&pg](double x) { return x * pg.terms(x).s3; }, exps, lo, hi)[0];

  RadialSystem& next = res.next;
  next.kappa = rec.kappa_after;
  next.stage = rs.stage + 1;
  next.weyl = op.weyl;
  next.weyl.system.theta_in_h = next.kappa < 0.5;
  next.normalized = false;
  if (kappa > 1.0) {
    rec.gauged = true;
    next.weyl.system.pot = sigma2_gauge(op.pot);
    next.weyl.system.phi = rotated(op.weyl.system.phi);
    next.weyl.system.theta = rotated(op.weyl.system.theta);
    next.weyl.uplus = rotated(op.weyl.uplus);
    next.weyl.bc_at_b = i_sigma2(op.weyl.bc_at_b);

    // x^-kappa' Phi -> (0, N_kappa') as x -> 0
    const double x = 1e-4 * b;
    const double expect = frobenius_norm_constant(next.kappa) * std::pow(x, next.kappa);
    const Vec2 v = next.weyl.system.phi(Complex(lambda + 1.0))(x);
    rec.normalized = std::abs(v.u1) <= 1e-2 * expect && std::abs(v.u2 - expect) <= 1e-2 * expect;
    next.normalized = rec.normalized;
  }
  return res;
}

Chooser default_chooser(double gamma, std::optional<std::pair<double, double>> window) {
  return [gamma, window](const RadialSystem& stage, int) -> std::pair<double, double> {
    const WeylData& wd = stage.weyl;
    if (window) {
      const auto z = admissible_lambda_right(wd, window->first, window->second);
      if (z.empty()) throw Error(ErrorKind::NoAdmissibleLambda, "no zero of M in the configured window");
      return {z.front(), gamma};
    }
    const double len = wd.pot().b - wd.pot().a;
    const double step = kPi / (4.0 * len);
    for (double hi = 4.0 * kPi / len; hi < 1e4; hi *= 2.0) {
      std::vector<double> poles;
      for (double e : eigenvalues(wd, -0.5 * step, hi)) {
        if (e >= -1e-8) poles.push_back(e);
      }
      if (poles.size() < 2) continue;
      const auto z = admissible_lambda_right(wd, poles[0], poles[1]);
      if (z.empty()) throw Error(ErrorKind::NoAdmissibleLambda, "no zero of M between the first two poles");
      return {z.front(), gamma};
    }
    throw Error(ErrorKind::NoAdmissibleLambda, "fewer than two poles of M found");
  };
}

ReductionLedger iterate_reduction(const RadialSystem& rs, const Chooser& chooser, int max_steps) {
  ReductionLedger ledger;
  ledger.kappa = rs.kappa;
  ledger.b = rs.pot().b;
  ledger.P.push_back({1.0});
  RadialSystem stage = rs;
  while (stage.kappa > 0.5 && (max_steps < 0 || static_cast<int>(ledger.steps.size()) < max_steps)) {
    const auto [lambda, gamma] = chooser(stage, static_cast<int>(ledger.steps.size()));
    StepResult r = kappa_lower_step(stage, lambda, gamma);
    ledger.steps.push_back(r.record);
    std::vector<double> p = ledger.P.back();
    std::vector<double> q(p.size() + 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      q[i + 1] += p[i];
      q[i] -= lambda * p[i];
    }
    ledger.P.push_back(std::move(q));
    stage = std::move(r.next);
  }
  ledger.terminal = std::move(stage);
  return ledger;
}

Complex polynomial_value(const std::vector<double>& coeffs, Complex z) {
  Complex v = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * z + *it;
  return v;
}

Complex assemble_M(const ReductionLedger& ledger, Complex z, Complex M0) {
  const Complex pn = polynomial_value(ledger.P.back(), z);
  Complex m = pn * pn * M0;
  for (std::size_t n = 0; n < ledger.steps.size(); ++n) {
    const Complex p = polynomial_value(ledger.P[n], z);
    m -= ledger.steps[n].c * p * p * (ledger.steps[n].lambda - z);
  }
  return m;
}

Complex assemble_M(const ReductionLedger& ledger, Complex z) {
  if (!ledger.terminal) throw Error(ErrorKind::InvalidArgument, "ledger has no terminal operator");
  return assemble_M(ledger, z, weyl_function(ledger.terminal->weyl, z));
}

std::string ledger_to_json(const ReductionLedger& ledger) {
  nlohmann::json j;
  j["kappa"] = ledger.kappa;
  j["b"] = ledger.b;
  j["steps"] = nlohmann::json::array();
  for (const auto& s : ledger.steps) {
    j["steps"].push_back({{"lambda", s.lambda},
                          {"gamma", s.gamma},
                          {"c", s.c},
                          {"wb", s.wb},
                          {"kappa", s.kappa},
                          {"kappa_after", s.kappa_after},
                          {"fit_s1", s.fit_s1},
                          {"fit_s3", s.fit_s3},
                          {"gauged", s.gauged},
                          {"normalized", s.normalized}});
  }
  j["P"] = ledger.P;
  if (ledger.terminal) j["terminal_kappa"] = ledger.terminal->kappa;
  return j.dump(2);
}

ReductionLedger ledger_from_json(const std::string& text) {
  ReductionLedger ledger;
  try {
    const auto j = nlohmann::json::parse(text);
    ledger.kappa = j.at("kappa").get<double>();
    ledger.b = j.at("b").get<double>();
    for (const auto& s : j.at("steps")) {
      ReductionStep r;
      r.lambda = s.at("lambda").get<double>();
      r.gamma = s.at("gamma").get<double>();
      r.c = s.at("c").get<double>();
      r.wb = s.at("wb").get<double>();
      r.kappa = s.at("kappa").get<double>();
      r.kappa_after = s.at("kappa_after").get<double>();
      r.fit_s1 = s.value("fit_s1", 0.0);
      r.fit_s3 = s.value("fit_s3", 0.0);
      r.gauged = s.value("gauged", false);
      r.normalized = s.value("normalized", false);
      ledger.steps.push_back(r);
    }
    ledger.P = j.at("P").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("ledger: ") + e.what());
  }
  if (ledger.P.size() != ledger.steps.size() + 1) {
    throw Error(ErrorKind::ParseError, "ledger: P must have one more entry than steps");
  }
  return ledger;
}

FactorizationReport measure_factorization_check(const ReductionLedger& ledger, const SpectralMeasureDiscrete& original,
                                                std::size_t n_atoms) {
  if (!ledger.terminal) throw Error(ErrorKind::InvalidArgument, "ledger has no terminal operator");
  if (original.atoms.empty()) throw Error(ErrorKind::AtomMismatch, "original measure is empty");
  const auto& atoms = original.atoms;
  double gap = kInf;
  for (std::size_t i = 1; i < atoms.size(); ++i) gap = std::min(gap, atoms[i].lambda - atoms[i - 1].lambda);
  if (!std::isfinite(gap)) gap = 1.0;
  const double lo = atoms.front().lambda - 0.5 * gap;
  const double hi = atoms.back().lambda + 0.5 * gap;

  const WeylData& wd = ledger.terminal->weyl;
  const auto terminal = norming_weights(wd, eigenvalues(wd, lo, hi));
  const std::vector<double>& p = ledger.P.back();

  FactorizationReport rep;
  std::vector<bool> used(atoms.size(), false);
  for (const Atom& t : terminal.atoms) {
    const auto it = std::find_if(atoms.begin(), atoms.end(),
                                 [&](const Atom& a) { return std::abs(a.lambda - t.lambda) <= 1e-7; });
    if (it == atoms.end()) {
      const bool inserted = std::any_of(ledger.steps.begin(), ledger.steps.end(),
                                        [&](const ReductionStep& s) {
                                          // the inserted eigenvalue sits where the commuted potential is least accurate
                                          return std::abs(s.lambda - t.lambda) <= 1e-5 * std::max(1.0, std::abs(s.lambda));
                                        });
      if (!inserted) {
        throw Error(ErrorKind::AtomMismatch, "terminal atom at " + std::to_string(t.lambda) + " has no counterpart");
      }
      rep.only_terminal.push_back(t.lambda);
      continue;
    }
    used[static_cast<std::size_t>(it - atoms.begin())] = true;
    const double pv = polynomial_value(p, t.lambda).real();
    const double r = (it->weight / t.weight) / (pv * pv);
    rep.lambdas.push_back(t.lambda);
    rep.ratios.push_back(r);
    rep.max_deviation = std::max(rep.max_deviation, std::abs(r - 1.0));
  }
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!used[i]) {
      throw Error(ErrorKind::AtomMismatch, "original atom at " + std::to_string(atoms[i].lambda) + " lost");
    }
  }
  if (rep.lambdas.size() < n_atoms) {
    throw Error(ErrorKind::AtomMismatch, "only " + std::to_string(rep.lambdas.size()) + " common atoms");
  }
  return rep;
}

namespace {

double slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

NevanlinnaReport nevanlinna_index(const SpectralMeasureDiscrete& measure, int k_max) {
  NevanlinnaReport rep;
  std::vector<Atom> atoms = measure.atoms;
  rep.atoms = atoms.size();
  if (atoms.size() < 30) {
    throw Error(ErrorKind::Inconclusive, "need at least 30 atoms, have " + std::to_string(atoms.size()));
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return std::abs(a.lambda) < std::abs(b.lambda); });
  // Cauchy differences S_k(2L) - S_k(L) grow like L^(t_k + d): t_k from the
  // terms, d from the counting function N(L), both over the outer half.
  // With a handful of atoms per window, fitting the differences directly is
  // dominated by the integer counts.
  const double lmax = std::abs(atoms.back().lambda);
  std::vector<double> logl;
  std::vector<double> logn;
  std::vector<const Atom*> outer;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double l = std::abs(atoms[i].lambda);
    if (l < 0.5 * lmax || l == 0.0) continue;
    logl.push_back(std::log(l));
    logn.push_back(std::log(static_cast<double>(i + 1)));
    outer.push_back(&atoms[i]);
  }
  if (outer.size() < 8) throw Error(ErrorKind::Inconclusive, "too few atoms in the outer half of the window");
  const double d = slope(logl, logn);
  constexpr double kBand = 0.2;
  for (int k = 0; k <= k_max; ++k) {
    std::vector<double> logt;
    for (const Atom* a : outer) {
      if (!(a->weight > 0.0)) throw Error(ErrorKind::Inconclusive, "nonpositive weight in the moment test");
      logt.push_back(std::log(a->weight) - (k + 1) * std::log1p(a->lambda * a->lambda));
    }
    const double e = slope(logl, logt) + d;
    rep.exponents.push_back(e);
    if (std::abs(e) <= kBand) {
      rep.note = "borderline growth exponent " + std::to_string(e) + " at k = " + std::to_string(k);
      throw Error(ErrorKind::Inconclusive, rep.note);
    }
    if (e < 0.0) {
      rep.index = k;
      rep.note = "Cauchy differences decay like L^" + std::to_string(e);
      return rep;
    }
  }
  throw Error(ErrorKind::Inconclusive, "no convergent moment up to k = " + std::to_string(k_max));
}

bool herglotz_check(const WeylData& wd, const std::vector<Complex>& points) {
  for (Complex z : points) {
    if (z.imag() == 0.0) throw Error(ErrorKind::InvalidArgument, "Herglotz test points must be off the real axis");
    if (!(weyl_function(wd, z).imag() * z.imag() > 0.0)) return false;
  }
  return true;
}

}  // namespace dirac
