#include "fedpriv/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fedpriv {

namespace {

bool high_budget_local(const ModelConfig& cfg) {
  return cfg.m > 1 && cfg.s > 0.25;
}

}  // namespace

RateTerms rate_terms(const ModelConfig& cfg) {
  const double m = cfg.m;
  const double n = cfg.n;
  const double s2 = cfg.sigma * cfg.sigma;
  const double eps = cfg.epsilon;
  const double s = cfg.s;
  const double t = std::sqrt(std::min(1.0, n * eps * eps));
  RateTerms r{};
  r.A = std::pow(s2 / (m * n), 2 * s / (2 * s + 0.5));
  r.B_shared = std::pow(s2 / (m * std::pow(n, 1.5) * eps * t), 2 * s / (2 * s + 1));
  r.B_local = std::pow(s2 / (m * n * n * eps * eps), 2 * s / (2 * s + 1.5));
  r.C = std::pow(s2 / (std::sqrt(m) * n * t), 2 * s / (2 * s + 0.5));
  r.D = s2 / (m * n * n * eps * eps);
  return r;
}

double separation_rate_local(const ModelConfig& cfg) {
  const RateTerms r = rate_terms(cfg);
  if (!high_budget_local(cfg)) return r.A + r.C + r.D;
  return r.A + std::min(r.B_local, r.C + r.D);
}

double separation_rate_shared(const ModelConfig& cfg) {
  const RateTerms r = rate_terms(cfg);
  if (cfg.m == 1) return r.A + r.C + r.D;
  const double own = r.A + std::min(r.B_shared, r.C + r.D);
  return std::min(own, separation_rate_local(cfg));
}

double separation_rate(const ModelConfig& cfg, bool shared) {
  return shared ? separation_rate_shared(cfg) : separation_rate_local(cfg);
}

RegimeReport classify_regime(const ModelConfig& cfg, bool shared) {
  const RateTerms r = rate_terms(cfg);
  const bool budget_ok = cfg.n * cfg.epsilon * cfg.epsilon >= 1.0;

  double b = kInf;
  if (shared && cfg.m > 1) b = std::min(b, r.B_shared);
  if (high_budget_local(cfg)) b = std::min(b, r.B_local);

  struct Term {
    int id;
    double value;
    const char* name;
  };
  std::vector<Term> active;
  if (b <= r.C + r.D) {
    active = {{1, r.A, "classical"}, {budget_ok ? 2 : 3, b, "high_budget"}};
  } else {
    active = {{1, r.A, "classical"},
              {budget_ok ? 4 : 5, r.C, "low_budget"},
              {6, r.D, "floor"}};
  }

  RegimeReport rep;
  rep.shared = shared;
  rep.rho_squared = separation_rate(cfg, shared);
  const Term* best = &active.front();
  for (const auto& t : active) {
    rep.branch_value += t.value;
    // Ties (to rounding) go to the lower regime id.
    if (t.value > best->value * (1.0 + 1e-12)) best = &t;
  }
  rep.regime_id = best->id;
  rep.dominant_term = best->name;
  rep.case_regime = case_regime(cfg, shared);
  return rep;
}

int case_regime(const ModelConfig& cfg, bool shared) {
  const double s = cfg.s;
  const double m = cfg.m;
  const double n = cfg.n;
  const double sg = cfg.sigma;
  const double eps = cfg.epsilon;
  const double root_n = 1.0 / std::sqrt(n);
  const double t5 = std::pow(sg, 1 / (2 * s + 1)) / std::sqrt(m) *
                    std::pow(n, -(1 + s) / (2 * s + 1));

  if (!shared && s <= 0.25) {
    const double v5 = std::pow(sg, 2 / (4 * s + 1)) / std::sqrt(m) *
                      std::pow(n, -(1 + s) / (2 * s + 1));
    if (eps >= root_n) return 4;
    if (eps >= v5) return 5;
    return 6;
  }

  const double t1 = std::pow(sg, -2 / (4 * s + 1)) * std::pow(m, 1 / (4 * s + 1)) *
                    std::pow(n, (0.5 - 2 * s) / (4 * s + 1));
  double t2 = 0;
  double t3 = 0;
  if (shared) {
    t2 = std::pow(sg, -2 / (4 * s + 1)) * std::pow(m, -2 * s / (4 * s + 1)) *
         std::pow(n, (0.5 - 2 * s) / (4 * s + 1));
    t3 = std::pow(sg, -1 / (2 * s)) / std::sqrt(m) *
         std::pow(n, (1 - 2 * s) / (4 * s));
  } else {
    t2 = std::pow(sg, -2 / (4 * s + 1)) * std::pow(m, (0.25 - s) / (4 * s + 1)) *
         std::pow(n, (0.5 - 2 * s) / (4 * s + 1));
    t3 = std::pow(sg, -4 / (4 * s - 1)) / std::sqrt(m) *
         std::pow(n, (2.5 - 2 * s) / (4 * s - 1));
  }
  if (eps >= t1) return 1;
  if (eps >= t2 && eps >= root_n) return 2;
  if (eps >= t3 && eps < root_n) return 3;
  if (eps >= root_n && eps < t2) return 4;
  if (eps >= t5 && eps < t3 && eps < root_n) return 5;
  // The conditions above leave only eps < t5.
  return 6;
}

double regime_rho_exponent(int regime_id, double s, bool shared) {
  switch (regime_id) {
    case 1:
    case 4:
      return 0.0;
    case 2:
      return shared ? -s / (2 * s + 1) : -2 * s / (2 * s + 1.5);
    case 3:
      return shared ? -2 * s / (2 * s + 1) : -2 * s / (2 * s + 1.5);
    case 5:
      return -s / (2 * s + 0.5);
    case 6:
      return -1.0;
    default:
      throw std::invalid_argument("regime id must be in 1..6");
  }
}

int optimal_resolution(const ModelConfig& cfg, bool shared) {
  const double rho = std::sqrt(separation_rate(cfg, shared));
  const double raw = std::floor(std::log2(1.0 / rho) / cfg.s);
  return static_cast<int>(std::clamp(raw, 1.0, 30.0));
}

double log_multiplier_squared(const ModelConfig& cfg) {
  const double N = static_cast<double>(cfg.N());
  if (N < 3 || !(cfg.delta > 0)) return std::nan("");
  const double ln = std::log(N);
  return std::log(ln) * std::pow(ln, 1.5) * std::log(1.0 / cfg.delta);
}

std::vector<RateRow> rate_curve(const ModelConfig& base,
                                std::span<const double> eps_grid, bool shared) {
  std::vector<RateRow> rows;
  rows.reserve(eps_grid.size());
  const double lo = 1.0 / static_cast<double>(base.N());
  for (double eps : eps_grid) {
    if (!(eps > lo) || !(eps <= 1.0)) {
      throw std::invalid_argument("epsilon grid point outside (1/N, 1]");
    }
    ModelConfig cfg = base;
    cfg.epsilon = eps;
    const RegimeReport rep = classify_regime(cfg, shared);
    rows.push_back({eps, rep.rho_squared, rep.regime_id, rep.case_regime,
                    shared});
  }
  return rows;
}

std::vector<double> log_grid(double lo, double hi, int n_points) {
  if (n_points < 1 || !(lo > 0) || !(hi >= lo)) {
    throw std::invalid_argument("log grid needs 0 < lo <= hi and >= 1 point");
  }
  std::vector<double> out(n_points);
  if (n_points == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n_points; ++i) {
    out[i] = std::exp(a + (b - a) * i / (n_points - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace fedpriv
