#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bernstein/detail/quadrature.hpp"
#include "bernstein/foliation.hpp"

namespace bernstein::perturbed_leaf {

using foliation::LeafProfile;

// f0 = sigma - s sigma', the Jacobi field generated by Lipschitz rescaling
// of the leaf; values at the profile nodes.
std::vector<double> jacobi_field_f0(const LeafProfile& profile);

// L f = f'' + (log p)' f' + q f along the profile, with
//   p = s^3 sigma^3 (1 + sigma'^2)^{-3/2},  q = 3 (1 + sigma'^2) / sigma^2.
double linearized_apply(double f, double f_p, double f_pp,
                        const LeafProfile& profile, double s);

struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Solution of L f = g by variation of parameters around f0:
//   f(s) = f0(s) int_0^s f0^{-2} p^{-1} int_0^t f0 p g dtau dt.
// Both integrals run on the profile grid with Hermite-interpolated sigma;
// the inner integrand vanishes like s^3 at the origin so no regularization
// beyond the profile's own series start is needed.
class PerturbationSolution {
 public:
  PerturbationSolution(const LeafProfile& profile,
                       std::function<double(double)> g);

  void eval(double s, double& f, double& f_p, double& f_pp) const;
  double value(double s) const;

  const std::vector<double>& nodes() const { return nodes_; }
  std::vector<double> values_on_grid() const;

  // Coefficient of the s^{-2} asymptote of f, fitted over the grid tail.
  double tail_coefficient() const { return c_tail_; }
  bool f0_sign_change() const { return f0_sign_change_; }

 private:
  double u_of(double s) const;       // outer integral
  double u_prime_of(double s) const;
  double f0_at(double s, double* d1 = nullptr) const;
  double p_at(double s) const;

  const LeafProfile* profile_;
  std::function<double(double)> g_;
  std::vector<double> nodes_;
  detail::CumulativeIntegral inner_;
  detail::CumulativeIntegral outer_;
  double c_tail_ = 0.0;
  bool f0_sign_change_ = false;
};

// Largest eps0 in a halving sequence from 0.1 with
//   G(sigma + eps0 f) sigma^{9/2} >= eps0 / 2
// at every node of the profile grid (and the mirrored bound for the
// negative perturbation, which the subsolution construction needs).
double choose_epsilon0(const LeafProfile& profile,
                       const PerturbationSolution& f);

struct PerturbedLeaf {
  LeafProfile base;
  std::vector<double> f;          // per base node
  double eps0 = 0.0;
  std::vector<double> sigma_bar;  // base.sigma + eps0 * f
  double a_bar = 0.0;

  // G(sigma_bar) sigma^{9/2} per node and its minimum; must be >= eps0/2
  std::vector<double> margin;
  double min_curvature_margin = 0.0;
};

PerturbedLeaf build_perturbed_leaf(const LeafProfile& profile,
                                   const PerturbationSolution& f,
                                   double eps0);

// sigma_bar and derivatives at arbitrary s (grid + series + asymptote).
void eval_perturbed(const LeafProfile& profile, const PerturbationSolution& f,
                    double eps0, double s, double& v, double& d1, double& d2);

// G(sigma + eps f)(s) evaluated from analytic profile data and the integral
// representation of f; s = 0 uses the even-profile limit of G.
double curvature_of_perturbed(const LeafProfile& profile,
                              const PerturbationSolution& f, double eps,
                              double s);

void write_perturbed_csv(const PerturbedLeaf& leaf, const std::string& path);

}  // namespace bernstein::perturbed_leaf
