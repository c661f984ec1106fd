#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "dirac/radial.hpp"

namespace dirac {

double frobenius_norm_constant(double kappa) {
  return std::sqrt(kPi) / (std::pow(2.0, kappa) * std::tgamma(kappa + 0.5));
}

TaylorData taylor_coefficients(const PotentialSpec& spec, double h, int degree, double max_residual) {
  if (!(h > 0.0) || degree < 0) throw Error(ErrorKind::InvalidArgument, "taylor fit needs h > 0, degree >= 0");
  const int m = 3 * (degree + 1);
  Eigen::MatrixXd A(m, degree + 1);
  Eigen::MatrixXd rhs(m, 3);
  std::vector<double> ts(m);
  for (int j = 0; j < m; ++j) {
    const double t = 0.5 * (1.0 - std::cos(kPi * (j + 0.5) / m));
    ts[j] = t;
    double p = 1.0;
    for (int n = 0; n <= degree; ++n, p *= t) A(j, n) = p;
    const PauliTerms q = spec.regular_terms(t * h);
    rhs(j, 0) = q.el;
    rhs(j, 1) = q.s1;
    rhs(j, 2) = q.s3;
  }
  const Eigen::MatrixXd coef = A.colPivHouseholderQr().solve(rhs);

  TaylorData out;
  out.h = h;
  double scale = 1.0;
  double worst = 0.0;
  for (int k = 0; k <= 64; ++k) {
    const double t = k / 64.0;
    const PauliTerms q = spec.regular_terms(std::max(t, 1e-12) * h);
    const double exact[3] = {q.el, q.s1, q.s3};
    for (int c = 0; c < 3; ++c) {
      double v = 0.0;
      for (int n = degree; n >= 0; --n) v = v * t + coef(n, c);
      scale = std::max(scale, std::abs(exact[c]));
      worst = std::max(worst, std::abs(v - exact[c]));
    }
  }
  out.fit_residual = worst / scale;
  if (!(out.fit_residual <= max_residual)) {
    throw Error(ErrorKind::SeriesDivergence, "Q is not smooth enough near 0 for the series (fit residual " +
                                                 std::to_string(out.fit_residual) + ")");
  }
  double hn = 1.0;
  for (int n = 0; n <= degree; ++n, hn *= h) {
    out.el.push_back(coef(n, 0) / hn);
    out.am.push_back(coef(n, 1) / hn);
    out.s3.push_back(coef(n, 2) / hn);
  }
  return out;
}

Vec2 FrobeniusSeries::operator()(double x) const {
  Vec2 s;
  for (auto it = a.rbegin(); it != a.rend(); ++it) s = s * Complex(x) + *it;
  return s * Complex(std::pow(x, rho));
}

Complex FrobeniusSeries::gram(double x) const {
  const std::size_t n_max = a.size();
  Complex sum = 0.0;
  double xn = std::pow(x, 2.0 * rho + 1.0);
  for (std::size_t n = 0; n < n_max; ++n, xn *= x) {
    Complex c = 0.0;
    for (std::size_t j = 0; j <= n; ++j) c += bilinear(a[j], a[n - j]);
    sum += c * xn / (2.0 * rho + static_cast<double>(n) + 1.0);
  }
  return sum;
}

double FrobeniusSeries::tail(double x) const {
  Vec2 s;
  for (auto it = a.rbegin(); it != a.rend(); ++it) s = s * Complex(x) + *it;
  const double last = a.back().norm() * std::pow(x, static_cast<double>(a.size() - 1));
  return last / std::max(s.norm(), 1e-300);
}

FrobeniusSeries frobenius_series(double kappa, const TaylorData& taylor, Complex z, SeriesKind kind, int order) {
  const double twice = 2.0 * kappa;
  if (kappa != 0.0 && std::abs(twice - std::round(twice)) < 1e-12) {
    throw Error(ErrorKind::LogCaseUnsupported, "2 kappa = " + std::to_string(twice) + " is an integer");
  }
  const double norm = frobenius_norm_constant(kappa);
  FrobeniusSeries s;
  s.rho = kind == SeriesKind::phi ? kappa : -kappa;
  s.a.resize(static_cast<std::size_t>(order) + 1);
  s.a[0] = kind == SeriesKind::phi ? Vec2(0.0, norm) : Vec2(1.0 / norm, 0.0);

  auto at = [](const std::vector<double>& v, std::size_t k) { return k < v.size() ? v[k] : 0.0; };
  for (std::size_t n = 1; n <= static_cast<std::size_t>(order); ++n) {
    Complex r1 = 0.0;
    Complex r2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2& prev = s.a[n - 1 - k];
      const double el = at(taylor.el, k);
      const double s3 = at(taylor.s3, k);
      const double r = at(taylor.am, k);
      const Complex alpha = (k == 0 ? z : Complex(0.0)) - el + s3;
      const Complex beta = (k == 0 ? z : Complex(0.0)) - el - s3;
      r1 += -r * prev.u1 + alpha * prev.u2;
      r2 += -beta * prev.u1 + r * prev.u2;
    }
    const double d1 = s.rho + kappa + static_cast<double>(n);
    const double d2 = s.rho - kappa + static_cast<double>(n);
    s.a[n] = Vec2(r1 / d1, r2 / d2);
  }
  return s;
}

namespace {

struct SeriesSetup {
  double kappa;
  std::shared_ptr<const TaylorData> taylor;
  Potential pot;
  int order;
  double x_eps;
  double tol;
};

Solution composite(const SeriesSetup& st, Complex z, SeriesKind kind) {
  // Hand off as far out as the series allows: integrating Theta outward
  // amplifies roundoff by (x / x0)^(2 kappa).
  double xe = st.taylor->h;
  FrobeniusSeries s = frobenius_series(st.kappa, *st.taylor, z, kind, st.order);
  while (s.tail(xe) > 0.1 * st.tol) {
    xe *= 0.5;
    if (xe < 1e-9 * st.pot.b) {
      throw Error(ErrorKind::SeriesDivergence, "series tail above tolerance at every start point");
    }
  }
  const TraceLabel label = kind == SeriesKind::phi ? TraceLabel::Phi : TraceLabel::Theta;
  auto tr = std::make_shared<const SolutionTrace>(integrate(st.pot, z, xe, s(xe), st.pot.b, st.tol, label));
  auto series = std::make_shared<const FrobeniusSeries>(std::move(s));
  const Complex g0 = series->gram(xe);
  Solution out;
  out.z = z;
  out.lo = 0.0;
  out.hi = st.pot.b;
  out.label = label;
  out.singular_lo = kind == SeriesKind::theta && st.kappa > 0.0;
  out.eval = [series, tr, xe](double x) { return x < xe ? (*series)(x) : (*tr)(x); };
  out.gram = [series, tr, xe, g0](double x) { return x < xe ? series->gram(x) : g0 + tr->gram(x); };
  return out;
}

SeriesSetup setup_of(const RadialSystem& rs) {
  return {rs.kappa, rs.taylor, make_potential(rs.spec), rs.series_order, rs.x_eps, rs.tol()};
}

}  // namespace

RadialSystem make_radial_system(const PotentialSpec& spec, const RadialOptions& opt) {
  if (spec.endpoint_a != EndpointKind::singular_radial) {
    throw Error(ErrorKind::InvalidArgument, "radial system needs a singular_radial left endpoint");
  }
  spec.validate();
  if (spec.q_mg && !spec.q_mg->is_zero()) {
    throw Error(ErrorKind::InvalidArgument, "radial series do not take q_mg; remove it with eliminate_magnetic");
  }
  if (opt.series_order < 2) throw Error(ErrorKind::InvalidArgument, "series_order must be at least 2");
  const double kappa = spec.kappa;
  const double twice = 2.0 * kappa;
  if (kappa != 0.0 && std::abs(twice - std::round(twice)) < 1e-12) {
    throw Error(ErrorKind::LogCaseUnsupported, "2 kappa = " + std::to_string(twice) + " is an integer");
  }
  RadialSystem rs;
  rs.kappa = kappa;
  rs.spec = spec;
  rs.series_order = opt.series_order;
  rs.x_eps = opt.x_eps > 0.0 ? opt.x_eps : 1e-3 * spec.b;
  if (!(rs.x_eps < spec.b)) throw Error(ErrorKind::InvalidArgument, "x_eps must lie inside (0, b)");
  // widest radius (up to b / 10) on which Q is a polynomial to ~roundoff
  for (double h = std::max(0.1 * spec.b, rs.x_eps); !rs.taylor; h *= 0.5) {
    if (h <= rs.x_eps) {
      rs.taylor = std::make_shared<const TaylorData>(taylor_coefficients(spec, rs.x_eps));
      break;
    }
    try {
      rs.taylor = std::make_shared<const TaylorData>(taylor_coefficients(spec, h, 12, 1e-13));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SeriesDivergence) throw;
    }
  }

  FundamentalSystem fs;
  fs.pot = make_potential(spec);
  fs.tol = opt.tol;
  fs.tag = Normalization::radial_frobenius;
  fs.theta_in_h = kappa < 0.5;
  rs.weyl.system.tol = opt.tol;
  const SeriesSetup st = setup_of(rs);
  fs.phi = [st](Complex z) { return composite(st, z, SeriesKind::phi); };
  fs.theta = [st](Complex z) { return composite(st, z, SeriesKind::theta); };
  rs.weyl = make_weyl_data(std::move(fs), opt.bc_at_b);
  return rs;
}

Solution frobenius_phi(const RadialSystem& rs, Complex z) { return composite(setup_of(rs), z, SeriesKind::phi); }

Solution frobenius_theta(const RadialSystem& rs, Complex z) {
  return composite(setup_of(rs), z, SeriesKind::theta);
}

}  // namespace dirac
