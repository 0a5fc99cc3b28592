#include "fedpriv/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace fedpriv {

namespace {

void require_delta(double delta) {
  if (!(delta > 0) || !(delta < 1)) {
    throw std::invalid_argument(
        "the Gaussian mechanism needs delta in (0, 1)");
  }
}

void require_positive(double v, const char* what) {
  if (!(v > 0)) {
    throw std::invalid_argument(std::string(what) + " must be positive");
  }
}

}  // namespace

double clip(double x, double a, double b) {
  if (!(a < b)) throw std::invalid_argument("clip requires a < b");
  return x > b ? b : (x < a ? a : x);
}

double gaussian_scale(double sensitivity, const PrivacyBudget& budget) {
  require_positive(sensitivity, "sensitivity");
  require_positive(budget.epsilon, "epsilon");
  require_delta(budget.delta);
  if (budget.components < 1) {
    throw std::invalid_argument("components must be >= 1");
  }
  return budget.epsilon /
         (sensitivity *
          std::sqrt(2.0 * budget.components * std::log(2.0 / budget.delta)));
}

Release gaussian_release(double value, double sensitivity,
                         const PrivacyBudget& budget, Engine& eng) {
  const double gamma = gaussian_scale(sensitivity, budget);
  MechanismRecord rec{sensitivity, gamma, 1.0, budget.components,
                      budget.delta, 0};
  return {gamma * value + standard_normal(eng), rec};
}

double gamma_threshold(double lipschitz, double epsilon, double delta,
                       int thresholds) {
  return gaussian_scale(lipschitz, {epsilon, delta, thresholds});
}

double gamma_threshold_adaptive(double lipschitz, double epsilon, double delta,
                                int thresholds, int low_levels) {
  require_positive(lipschitz, "Lipschitz constant");
  require_delta(delta);
  return epsilon /
         (2.0 * lipschitz *
          std::sqrt(static_cast<double>(thresholds) * low_levels *
                    std::log(4.0 / delta)));
}

double gamma_coordinate(double epsilon, double delta, double K, double tau) {
  require_positive(tau, "tau");
  require_delta(delta);
  return epsilon / (2.0 * std::sqrt(2.0 * K * std::log(2.0 / delta)) * tau);
}

double gamma_coordinate_adaptive(double epsilon, double delta, double K,
                                 int high_levels, double tau) {
  require_positive(tau, "tau");
  require_delta(delta);
  return epsilon /
         (4.0 * std::sqrt(high_levels * K *
                          std::log(4.0 / delta)) *
          tau);
}

double gamma_rotated(double epsilon, double delta, double K, long long N,
                     double tau) {
  require_positive(tau, "tau");
  require_delta(delta);
  return epsilon /
         (2.0 *
          std::sqrt(2.0 * K * std::log(2.0 / delta) *
                    std::log(static_cast<double>(N))) *
          tau);
}

double gamma_rotated_adaptive(double epsilon, double delta, double K,
                              int high_levels, long long N, double tau) {
  require_positive(tau, "tau");
  require_delta(delta);
  return epsilon /
         (4.0 *
          std::sqrt(K * high_levels *
                    std::log(4.0 / delta) * std::log(static_cast<double>(N))) *
          tau);
}

double lipschitz_constant(int n, int L, double tau, long long N,
                          double kappa_tilde) {
  require_positive(tau, "tau");
  const double d = static_cast<double>(dimension(L));
  const double sd = std::sqrt(d);
  const double branch = std::max(std::sqrt(n * sd * tau), std::sqrt(n * d));
  return kappa_tilde * std::log(static_cast<double>(N)) * branch / (n * sd);
}

bool check_set_B(BlockView block, double tau, double sigma, long long N,
                 double kappa_tilde) {
  const int n = block.size();
  const int d = block.dim();
  const int L = static_cast<int>(std::lround(std::log2(d + 2.0))) - 1;
  const double D = lipschitz_constant(n, L, tau, N, kappa_tilde);
  const double bound = D * n * std::sqrt(static_cast<double>(d)) / 8.0;
  std::vector<double> total(d, 0.0);
  for (int i = 0; i < n; ++i) {
    auto x = block.row(i);
    for (int c = 0; c < d; ++c) total[c] += x[c];
  }
  const double s2 = sigma * sigma;
  for (int i = 0; i < n; ++i) {
    auto x = block.row(i);
    double ip = 0.0;
    for (int c = 0; c < d; ++c) ip += x[c] * (total[c] - x[c]);
    if (std::abs(ip / s2) > bound) return false;
  }
  return true;
}

bool check_set_A_sampled(BlockView block, double tau, double sigma,
                         long long N, int subset_budget, Engine& eng,
                         double kappa_tilde) {
  const int n = block.size();
  const int d = block.dim();
  if (subset_budget < n) {
    throw std::invalid_argument("subset_budget must be at least n");
  }
  const int L = static_cast<int>(std::lround(std::log2(d + 2.0))) - 1;
  const double D = lipschitz_constant(n, L, tau, N, kappa_tilde);
  const double per_k = D * n * std::sqrt(static_cast<double>(d)) / 8.0;
  const double s2 = sigma * sigma;

  auto violates = [&](std::span<const int> subset) {
    std::vector<double> sum(d, 0.0);
    for (int i : subset) {
      auto x = block.row(i);
      for (int c = 0; c < d; ++c) sum[c] += x[c];
    }
    double sq = 0.0;
    for (double v : sum) sq += v * v;
    const double k = static_cast<double>(subset.size());
    return std::abs(sq / s2 - k * d) > k * per_k;
  };

  for (int i = 0; i < n; ++i) {
    const int one[1] = {i};
    if (violates(one)) return false;
  }
  const double k_tau = std::ceil(2.0 * tau / D);
  const int k_max = static_cast<int>(std::min<double>(k_tau, n));
  if (k_max < 2) return true;
  std::vector<int> idx(n);
  std::uniform_int_distribution<int> size_dist(2, k_max);
  for (int b = 0; b < subset_budget; ++b) {
    const int k = size_dist(eng);
    std::iota(idx.begin(), idx.end(), 0);
    for (int t = 0; t < k; ++t) {
      std::uniform_int_distribution<int> pick(t, n - 1);
      std::swap(idx[t], idx[pick(eng)]);
    }
    if (violates(std::span<const int>(idx.data(), k))) return false;
  }
  return true;
}

PrivacyAccount compose(std::span<const MechanismRecord> records) {
  double eps2 = 0.0;
  std::map<int, double> group_delta;
  for (const auto& r : records) {
    require_delta(r.delta);
    const double e =
        r.gamma * r.sensitivity * std::sqrt(2.0 * std::log(2.0 / r.delta));
    eps2 += e * e;
    auto& gd = group_delta[r.group];
    gd = std::max(gd, r.delta);
  }
  PrivacyAccount acc;
  acc.epsilon = std::sqrt(eps2);
  for (const auto& [g, dl] : group_delta) acc.delta += dl;
  return acc;
}

double clipped_second_moment(double tau, double sd) {
  require_positive(tau, "tau");
  require_positive(sd, "sd");
  const double t = tau / sd;
  const double tail = 0.5 * std::erfc(t / std::sqrt(2.0));  // 1 - Phi(t)
  const double pdf = std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
  const double inner = (1.0 - 2.0 * tail) - 2.0 * t * pdf;
  return sd * sd * inner + 2.0 * tau * tau * tail;
}

}  // namespace fedpriv
