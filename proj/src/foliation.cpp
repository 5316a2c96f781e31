#include "bernstein/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>

namespace bernstein::foliation {

namespace {

constexpr double kSeriesStart = 1e-3;

// Hermite cubic on [s0, s1] from endpoint values/derivatives.
void hermite(double s0, double v0, double d0, double s1, double v1, double d1,
             double s, double& v, double& d) {
  const double h = s1 - s0;
  const double x = (s - s0) / h;
  const double x2 = x * x;
  const double x3 = x2 * x;
  const double h00 = 2 * x3 - 3 * x2 + 1;
  const double h10 = x3 - 2 * x2 + x;
  const double h01 = -2 * x3 + 3 * x2;
  const double h11 = x3 - x2;
  v = h00 * v0 + h10 * h * d0 + h01 * v1 + h11 * h * d1;
  const double g00 = (6 * x2 - 6 * x) / h;
  const double g10 = 3 * x2 - 4 * x + 1;
  const double g01 = (-6 * x2 + 6 * x) / h;
  const double g11 = 3 * x2 - 2 * x;
  d = g00 * v0 + g10 * d0 + g01 * v1 + g11 * d1;
}

double ode_rhs(double sigma, double sigma_p, double s) {
  return -3.0 * (1.0 + sigma_p * sigma_p) * (sigma_p / s - 1.0 / sigma);
}

}  // namespace

double mean_curvature_residual(double sigma, double sigma_p, double sigma_pp,
                               double s) {
  if (s <= 0.0 || sigma <= 0.0) {
    throw std::domain_error("mean_curvature_residual: need s > 0, sigma > 0");
  }
  return sigma_pp + 3.0 * (1.0 + sigma_p * sigma_p) * (sigma_p / s - 1.0 / sigma);
}

double mean_curvature_residual_at_origin(double sigma, double sigma_pp) {
  if (sigma <= 0.0) {
    throw std::domain_error("mean_curvature_residual: need sigma > 0");
  }
  return 4.0 * sigma_pp - 3.0 / sigma;
}

std::array<double, 2> vector_field(double x, double y) {
  if (x == 0.0) throw std::domain_error("vector_field: x must be nonzero");
  return {-x + y, 3.0 * (1.0 + y * y) * (1.0 / x - y)};
}

bool in_trapping_region(double x, double y, double band) {
  if (x < 1.0 - band) return false;
  const double lower = std::pow(x, -2.5);
  const double upper = 1.0 / x;
  return y >= lower - band && y <= upper + band;
}

double lower_curve_polynomial(double z) {
  const double z3 = z * z * z;
  const double z10 = z3 * z3 * z3 * z;
  return 6.0 * z10 * z3 - 11.0 * z10 + 11.0 * z3 - 6.0;
}

long long lower_curve_polynomial_int(long long z) {
  long long z3 = z * z * z;
  long long z10 = z3 * z3 * z3 * z;
  return 6 * z10 * z3 - 11 * z10 + 11 * z3 - 6;
}

long long lower_curve_polynomial_derivative_int(long long z) {
  long long z2 = z * z;
  long long z9 = z2 * z2 * z2 * z2 * z;
  return 78 * z9 * z2 * z - 110 * z9 + 33 * z2;
}

BoundaryFluxReport verify_trapping_boundary(std::size_t n_samples,
                                            double x_min, double x_max) {
  if (n_samples < 2) {
    throw std::domain_error("verify_trapping_boundary: n_samples >= 2");
  }
  BoundaryFluxReport rep;
  rep.n_samples = n_samples;
  rep.min_margin_top = rep.min_margin_bottom = rep.min_poly_value =
      std::numeric_limits<double>::infinity();
  rep.poly_at_one = lower_curve_polynomial_int(1);
  rep.poly_derivative_at_one = lower_curve_polynomial_derivative_int(1);

  const double lmin = std::log(x_min);
  const double lmax = std::log(x_max);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double x =
        std::exp(lmin + (lmax - lmin) * double(i) / double(n_samples - 1));
    // Top curve y = 1/x: region lies below, inward flux = g' Vx - Vy.
    {
      const double y = 1.0 / x;
      const auto v = vector_field(x, y);
      rep.max_abs_vertical_top = std::max(rep.max_abs_vertical_top,
                                          std::abs(v[1]));
      const double margin = (-1.0 / (x * x)) * v[0] - v[1];
      rep.min_margin_top = std::min(rep.min_margin_top, margin);
    }
    // Bottom curve y = x^{-5/2}: region lies above, inward flux
    // = Vy - g' Vx = P(sqrt(x)) / (2 x^{15/2}).
    {
      const double y = std::pow(x, -2.5);
      const auto v = vector_field(x, y);
      const double gp = -2.5 * std::pow(x, -3.5);
      const double margin = v[1] - gp * v[0];
      rep.min_margin_bottom = std::min(rep.min_margin_bottom, margin);
      rep.min_poly_value =
          std::min(rep.min_poly_value, lower_curve_polynomial(std::sqrt(x)));
    }
  }
  return rep;
}

void series_sigma(double s, double& v, double& d1, double& d2) {
  constexpr double a2 = 3.0 / 8.0;
  constexpr double a4 = -15.0 / 512.0;
  constexpr double a6 = -39.0 / 32768.0;
  const double s2 = s * s;
  v = 1.0 + s2 * (a2 + s2 * (a4 + s2 * a6));
  d1 = s * (2 * a2 + s2 * (4 * a4 + s2 * 6 * a6));
  d2 = 2 * a2 + s2 * (12 * a4 + s2 * 30 * a6);
}

void LeafProfile::eval(double s, double& v, double& d1, double& d2) const {
  if (s < 0.0) throw std::domain_error("LeafProfile::eval: s < 0");
  if (s <= kSeriesStart) {
    series_sigma(s, v, d1, d2);
    return;
  }
  if (s >= s_grid.back()) {
    const double inv = 1.0 / s;
    const double i2 = inv * inv;
    v = s + a * i2 + b * i2 * inv;
    d1 = 1.0 - 2.0 * a * i2 * inv - 3.0 * b * i2 * i2;
    d2 = 6.0 * a * i2 * i2 + 12.0 * b * i2 * i2 * inv;
    return;
  }
  // binary search for the panel
  std::size_t lo = 0, hi = s_grid.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (s_grid[mid] <= s ? lo : hi) = mid;
  }
  hermite(s_grid[lo], sigma[lo], sigma_p[lo], s_grid[hi], sigma[hi],
          sigma_p[hi], s, v, d1);
  d2 = ode_rhs(v, d1, s);
}

double LeafProfile::eval_sigma(double s) const {
  double v, d1, d2;
  eval(s, v, d1, d2);
  return v;
}

double LeafProfile::sigma_ppp(double s) const {
  double v, d1, d2;
  eval(s, v, d1, d2);
  // d/ds of -3 (1+p^2)(p/s - 1/v)
  return -3.0 * (2.0 * d1 * d2 * (d1 / s - 1.0 / v) +
                 (1.0 + d1 * d1) * (d2 / s - d1 / (s * s) + d1 / (v * v)));
}

namespace {

struct Rk45Control {
  double tol;
  double max_step;
};

// Dormand-Prince 5(4) embedded step for a 2d system.
template <class Rhs>
bool dopri_step(const Rhs& rhs, double& x, std::array<double, 2>& y, double& h,
                const Rk45Control& ctl) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  auto axpy = [](const std::array<double, 2>& y0, double hh,
                 std::initializer_list<std::pair<double, const std::array<double, 2>*>> terms) {
    std::array<double, 2> r = y0;
    for (auto& [c, k] : terms) {
      r[0] += hh * c * (*k)[0];
      r[1] += hh * c * (*k)[1];
    }
    return r;
  };

  const auto k1 = rhs(x, y);
  const auto k2 = rhs(x + c2 * h, axpy(y, h, {{a21, &k1}}));
  const auto k3 = rhs(x + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
  const auto k4 = rhs(x + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  const auto k5 = rhs(x + c5 * h,
                      axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
  const auto k6 = rhs(x + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3},
                                         {a64, &k4}, {a65, &k5}}));
  const std::array<double, 2> y5 =
      axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
  const auto k7 = rhs(x + h, y5);

  double err = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                           e6 * k6[i] + e7 * k7[i]);
    const double sc = 1e-14 + ctl.tol * std::max(std::abs(y[i]), std::abs(y5[i]));
    err = std::max(err, std::abs(ei) / sc);
  }
  if (err <= 1.0) {
    x += h;
    y = y5;
  }
  const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
  h = std::min(h * fac, ctl.max_step);
  return err <= 1.0;
}

}  // namespace

LeafProfile integrate_leaf(double s_max, double tol) {
  if (s_max < 10.0) throw std::domain_error("integrate_leaf: s_max >= 10");
  if (!(tol > 0.0) || tol > 1e-6) {
    throw std::domain_error("integrate_leaf: 0 < tol <= 1e-6");
  }

  LeafProfile prof;
  prof.s_grid.push_back(0.0);
  prof.sigma.push_back(1.0);
  prof.sigma_p.push_back(0.0);
  prof.sigma_pp.push_back(0.75);

  auto push = [&prof](double s, double v, double d1) {
    prof.s_grid.push_back(s);
    prof.sigma.push_back(v);
    prof.sigma_p.push_back(d1);
    prof.sigma_pp.push_back(ode_rhs(v, d1, s));
    if (v <= 0.0) {
      throw IntegrationError("integrate_leaf: profile left sigma > 0", s, v,
                             d1, 0.0);
    }
  };

  // Phase 1: s in [s0, 1] in the physical variable, seeded by the series.
  {
    double s = kSeriesStart;
    std::array<double, 2> y;
    double d2;
    series_sigma(s, y[0], y[1], d2);
    push(s, y[0], y[1]);
    auto rhs = [](double s, const std::array<double, 2>& y) {
      return std::array<double, 2>{y[1], ode_rhs(y[0], y[1], s)};
    };
    double h = 1e-4;
    while (s < 1.0) {
      const Rk45Control ctl{tol, 0.005 * std::max(s, 0.2)};
      h = std::min(h, 1.0 - s);
      if (h < 1e-15) {
        if (s >= 1.0 - 1e-12) break;
        throw IntegrationError("integrate_leaf: step underflow", s, y[0], y[1], h);
      }
      if (dopri_step(rhs, s, y, h, ctl)) push(s, y[0], y[1]);
    }
  }

  // Phase 2: autonomous system in t = log s.
  {
    const std::size_t last = prof.s_grid.size() - 1;
    double t = std::log(prof.s_grid[last]);
    std::array<double, 2> X{prof.sigma[last] / prof.s_grid[last],
                            prof.sigma_p[last]};
    auto rhs = [](double, const std::array<double, 2>& X) {
      return vector_field(X[0], X[1]);
    };
    const double t_end = std::log(s_max);
    double h = 1e-3;
    while (t < t_end) {
      const Rk45Control ctl{tol, 0.01};
      h = std::min(h, t_end - t);
      if (h < 1e-15) {
        if (t >= t_end - 1e-12) break;
        throw IntegrationError("integrate_leaf: step underflow", std::exp(t),
                               X[0] * std::exp(t), X[1], h);
      }
      if (dopri_step(rhs, t, X, h, ctl)) {
        const double s = std::exp(t);
        push(s, s * X[0], X[1]);
      }
    }
  }

  const auto fit = fit_asymptotics(prof, {3.0, std::min(5.0, std::log(s_max))});
  prof.a = fit.a;
  prof.b = fit.b;
  prof.fit_window = fit.window;
  return prof;
}

LinearAnalysis linear_analysis() {
  LinearAnalysis la;
  la.M = {{{-1.0, 1.0}, {-6.0, -6.0}}};
  la.eigenvector_p = {1.0, -2.0};
  la.eigenvector_q = {1.0, -3.0};
  la.eigenvalue_p = -3.0;
  la.eigenvalue_q = -4.0;
  la.quad_form_min = quad_form_along_slope(1.0);
  la.quad_form_max = quad_form_along_slope(2.5);
  return la;
}

double quad_form_along_slope(double s) {
  return 2.0 * (6.0 * s * s - 5.0 * s + 1.0) / (1.0 + s * s);
}

AsymptoticFit fit_asymptotics_samples(
    const std::vector<std::array<double, 3>>& samples) {
  if (samples.size() < 2) throw FitError("fit_asymptotics: too few samples");
  const double t0 = samples.front()[0];
  // Column scaling by the first sample keeps the normal equations sane.
  const double s3 = std::exp(-3.0 * t0), s4 = std::exp(-4.0 * t0);
  double m11 = 0, m12 = 0, m22 = 0, r1 = 0, r2 = 0;
  for (const auto& smp : samples) {
    const double t = smp[0];
    const double c3 = std::exp(-3.0 * (t - t0));
    const double c4 = std::exp(-4.0 * (t - t0));
    // rows: (c3, c4; -2 c3, -3 c4) . (alpha, beta) = (Yx, Yy)
    m11 += c3 * c3 * (1 + 4);
    m12 += c3 * c4 * (1 + 6);
    m22 += c4 * c4 * (1 + 9);
    r1 += c3 * smp[1] - 2 * c3 * smp[2];
    r2 += c4 * smp[1] - 3 * c4 * smp[2];
  }
  const double det = m11 * m22 - m12 * m12;
  if (!(det > 1e-12 * m11 * m22)) {
    throw FitError("fit_asymptotics: ill-conditioned window");
  }
  const double alpha = (m22 * r1 - m12 * r2) / det;
  const double beta = (-m12 * r1 + m11 * r2) / det;

  AsymptoticFit fit;
  fit.a = alpha / s3;
  fit.b = beta / s4;
  fit.window = {samples.front()[0], samples.back()[0]};
  for (const auto& smp : samples) {
    const double t = smp[0];
    const double fx = fit.a * std::exp(-3 * t) + fit.b * std::exp(-4 * t);
    const double fy = -2 * fit.a * std::exp(-3 * t) - 3 * fit.b * std::exp(-4 * t);
    const double res = std::hypot(smp[1] - fx, smp[2] - fy);
    fit.max_residual_e6t = std::max(fit.max_residual_e6t, res * std::exp(6 * t));
  }
  return fit;
}

AsymptoticFit fit_asymptotics(const LeafProfile& profile,
                              std::pair<double, double> t_window) {
  if (t_window.second - t_window.first < 1.0) {
    throw FitError("fit_asymptotics: window length must be >= 1");
  }
  std::vector<std::array<double, 3>> samples;
  for (std::size_t i = 0; i < profile.s_grid.size(); ++i) {
    const double s = profile.s_grid[i];
    if (s <= 0.0) continue;
    const double t = std::log(s);
    if (t < t_window.first || t > t_window.second) continue;
    samples.push_back({t, profile.sigma[i] / s - 1.0, profile.sigma_p[i] - 1.0});
  }
  if (samples.size() < 8) {
    throw FitError("fit_asymptotics: window not covered by the profile");
  }
  auto fit = fit_asymptotics_samples(samples);
  fit.window = t_window;
  return fit;
}

TrappingCheck check_trapping(const LeafProfile& profile, double band) {
  TrappingCheck chk;
  double prev_norm = std::numeric_limits<double>::infinity();
  bool monotone_started = false;
  for (std::size_t i = 0; i < profile.s_grid.size(); ++i) {
    const double s = profile.s_grid[i];
    if (s <= 0.0) continue;
    const double x = profile.sigma[i] / s;
    const double y = profile.sigma_p[i];
    const bool inside = in_trapping_region(x, y, band);
    if (!chk.entered && inside) {
      chk.entered = true;
      chk.entry_s = s;
      chk.first_inside_index = i;
    } else if (chk.entered && !inside) {
      chk.stayed_inside = false;
    }
    const double norm = std::hypot(x - 1.0, y - 1.0);
    if (s >= 2.0) {  // asymptotic regime; norm should be decreasing here
      if (monotone_started && norm > prev_norm) {
        chk.max_norm_increase = std::max(chk.max_norm_increase, norm - prev_norm);
      }
      prev_norm = norm;
      monotone_started = true;
    }
  }
  return chk;
}

void write_leaf_csv(const LeafProfile& profile, const std::string& path) {
  std::ofstream out(path);
  out << "s,sigma,sigma_p,sigma_pp\n";
  char buf[160];
  for (std::size_t i = 0; i < profile.s_grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n",
                  profile.s_grid[i], profile.sigma[i], profile.sigma_p[i],
                  profile.sigma_pp[i]);
    out << buf;
  }
}

void write_phase_csv(const LeafProfile& profile, const std::string& path,
                     double band) {
  std::ofstream out(path);
  out << "t,x,y,in_region\n";
  char buf[160];
  for (std::size_t i = 0; i < profile.s_grid.size(); ++i) {
    const double s = profile.s_grid[i];
    if (s <= 0.0) continue;
    const double x = profile.sigma[i] / s;
    const double y = profile.sigma_p[i];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d\n", std::log(s), x, y,
                  in_trapping_region(x, y, band) ? 1 : 0);
    out << buf;
  }
}

}  // namespace bernstein::foliation
