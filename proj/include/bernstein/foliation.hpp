#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bernstein::foliation {

// Curvature operator of the rotationally symmetric profile {|y| = sigma(|x|)}
// in R^8 (x, y in R^4):
//   G(sigma) = sigma'' + 3 (1 + sigma'^2) (sigma'/s - 1/sigma).
// The mean curvature of the hypersurface is (1 + sigma'^2)^{-3/2} G(sigma);
// positive values mean the curvature vector points away from the cone
// {|y| = |x|}.
double mean_curvature_residual(double sigma, double sigma_p, double sigma_pp,
                               double s);

// Limit of G at s = 0 for an even profile (sigma'/s -> sigma'').
double mean_curvature_residual_at_origin(double sigma, double sigma_pp);

// Phase-plane field for X(t) = (e^{-t} sigma(e^t), sigma'(e^t)):
//   V(x, y) = (-x + y, 3 (1 + y^2) (1/x - y)).
std::array<double, 2> vector_field(double x, double y);

struct PhaseState {
  double t;
  double x;
  double y;
};

// R = {x >= 1} n {x^{-5/2} <= y <= x^{-1}}. `band` widens the region to
// absorb floating-point boundary grazing (0 = strict test).
bool in_trapping_region(double x, double y, double band = 0.0);

// P(z) = 6 z^13 - 11 z^10 + 11 z^3 - 6; the inward-flux condition on the
// lower boundary curve reduces to P(sqrt(x)) > 0.
double lower_curve_polynomial(double z);
// Same value by integer arithmetic when z is a small integer; used for the
// exact checks P(1) = 0, P'(1) = 1.
long long lower_curve_polynomial_int(long long z);
long long lower_curve_polynomial_derivative_int(long long z);

struct BoundaryFluxReport {
  // Unnormalized inward flux margins; positive means V points into R.
  double min_margin_top = 0.0;
  double min_margin_bottom = 0.0;
  double max_abs_vertical_top = 0.0;  // vertical component of V on y = 1/x
  double min_poly_value = 0.0;        // min of P(sqrt(x)) over the samples
  long long poly_at_one = 0;          // exact
  long long poly_derivative_at_one = 0;  // exact
  std::size_t n_samples = 0;
};

// Samples both boundary curves of R at n log-spaced x in (x_min, x_max]
// and reports the minimal inward-flux margins.
BoundaryFluxReport verify_trapping_boundary(std::size_t n_samples,
                                            double x_min = 1.001,
                                            double x_max = 1e3);

struct LeafProfile {
  std::vector<double> s_grid;    // strictly increasing, s_grid[0] == 0
  std::vector<double> sigma;
  std::vector<double> sigma_p;
  std::vector<double> sigma_pp;
  double a = 0.0;                // sigma = s + a s^{-2} + b s^{-3} + ...
  double b = 0.0;
  std::pair<double, double> fit_window{0.0, 0.0};

  // Hermite interpolation of (sigma, sigma') on the stored grid, power
  // series below the first positive node, asymptotic tail beyond the last.
  void eval(double s, double& v, double& d1, double& d2) const;
  double eval_sigma(double s) const;
  // Third derivative from differentiating the ODE along the profile.
  double sigma_ppp(double s) const;

  double s_max() const { return s_grid.back(); }
};

// Power series of the solution with sigma(0) = 1 around s = 0:
//   sigma = 1 + (3/8) s^2 - (15/512) s^4 - (39/32768) s^6 + O(s^8).
void series_sigma(double s, double& v, double& d1, double& d2);

struct IntegrationError : std::runtime_error {
  IntegrationError(const std::string& what, double s, double sigma,
                   double sigma_p, double step)
      : std::runtime_error(what), s(s), sigma(sigma), sigma_p(sigma_p),
        step(step) {}
  double s, sigma, sigma_p, step;
};

// Integrates the leaf ODE with sigma(0) = 1, sigma'(0) = 0 up to s_max.
// Starts from the power series at s0 = 1e-3 and switches to the autonomous
// phase system in t = log s for s > 1. `tol` is the local relative error
// target of the embedded RK pair.
LeafProfile integrate_leaf(double s_max, double tol);

struct LinearAnalysis {
  std::array<std::array<double, 2>, 2> M;  // [[-1, 1], [-6, -6]]
  std::array<double, 2> eigenvector_p;     // (1, -2)
  std::array<double, 2> eigenvector_q;     // (1, -3)
  double eigenvalue_p;                     // -3
  double eigenvalue_q;                     // -4
  double quad_form_min;                     // -2 M e . e at slope s = 1
  double quad_form_max;                     // ... at slope s = 5/2
};

LinearAnalysis linear_analysis();

// -2 M e . e for the unit vector e = (1, -s)/sqrt(1 + s^2); equals
// 2 (6 s^2 - 5 s + 1) / (1 + s^2).
double quad_form_along_slope(double slope);

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AsymptoticFit {
  double a = 0.0;
  double b = 0.0;
  double max_residual_e6t = 0.0;  // max |Y - fit| e^{6t} over the window
  std::pair<double, double> window{0.0, 0.0};
};

// Least-squares fit of Y(t) = X(t) - (1,1) against a e^{-3t} p + b e^{-4t} q
// over the samples with t in [window.first, window.second].
AsymptoticFit fit_asymptotics(const LeafProfile& profile,
                              std::pair<double, double> t_window = {3.0, 5.0});

// Generic synthetic-sample version used by tests; samples are (t, Yx, Yy).
AsymptoticFit fit_asymptotics_samples(
    const std::vector<std::array<double, 3>>& samples);

struct TrappingCheck {
  bool entered = false;
  bool stayed_inside = true;      // after first entry
  double entry_s = 0.0;
  double max_norm_increase = 0.0; // of |X - (1,1)| past the monotone onset
  std::size_t first_inside_index = 0;
};

// Sample-by-sample trapping check of the leaf's phase trajectory, with the
// tie-breaking band from the module's design notes.
TrappingCheck check_trapping(const LeafProfile& profile, double band = 1e-10);

void write_leaf_csv(const LeafProfile& profile, const std::string& path);
void write_phase_csv(const LeafProfile& profile, const std::string& path,
                     double band = 1e-10);

}  // namespace bernstein::foliation
