#pragma once

#include <span>
#include <vector>

#include "fedpriv/rng.hpp"
#include "fedpriv/sequence_model.hpp"

namespace fedpriv {

double clip(double x, double a, double b);

struct PrivacyBudget {
  double epsilon = 0;
  double delta = 0;
  int components = 1;
};

// Audit trail of one Gaussian-mechanism release. `delta` is the confidence
// parameter the release was calibrated for and `group` identifies the
// sub-protocol whose releases share a delta allowance.
struct MechanismRecord {
  double sensitivity = 0;
  double gamma = 0;
  double noise_std = 1;
  int components = 1;
  double delta = 0;
  int group = 0;
};

// gamma = epsilon / (sensitivity * sqrt(2 * components * ln(2/delta))).
double gaussian_scale(double sensitivity, const PrivacyBudget& budget);

struct Release {
  double value;
  MechanismRecord record;
};

Release gaussian_release(double value, double sensitivity,
                         const PrivacyBudget& budget, Engine& eng);

// Pre-noise multipliers of the individual procedures. The adaptive variants
// use the (epsilon/2, delta/2) split with their own constants.
double gamma_threshold(double lipschitz, double epsilon, double delta,
                       int thresholds);
double gamma_threshold_adaptive(double lipschitz, double epsilon, double delta,
                                int thresholds, int low_levels);
double gamma_coordinate(double epsilon, double delta, double K, double tau);
double gamma_coordinate_adaptive(double epsilon, double delta, double K,
                                 int high_levels, double tau);
double gamma_rotated(double epsilon, double delta, double K, long long N,
                     double tau);
double gamma_rotated_adaptive(double epsilon, double delta, double K,
                              int high_levels, long long N, double tau);

// D_tau = kappa_tilde * ln(N) * max(sqrt(n sqrt(d_L) tau), sqrt(n d_L))
//         / (n sqrt(d_L)).
double lipschitz_constant(int n, int L, double tau, long long N,
                          double kappa_tilde = 1.0);

// Exact check of the cross inner-product condition for every observation.
bool check_set_B(BlockView block, double tau, double sigma, long long N,
                 double kappa_tilde = 1.0);

// All singletons exactly, then `subset_budget` random subsets of sizes
// 2..K_tau. A true result is a sampled verdict.
bool check_set_A_sampled(BlockView block, double tau, double sigma,
                         long long N, int subset_budget, Engine& eng,
                         double kappa_tilde = 1.0);

// Budget spent by a set of releases from one server: per-release epsilons
// gamma * sensitivity * sqrt(2 ln(2/delta_i)) compose in quadrature, and the
// delta allowances of distinct groups add.
struct PrivacyAccount {
  double epsilon = 0;
  double delta = 0;
};

PrivacyAccount compose(std::span<const MechanismRecord> records);

// E[clip(sd * Z, -tau, tau)^2] for standard normal Z.
double clipped_second_moment(double tau, double sd = 1.0);

}  // namespace fedpriv
