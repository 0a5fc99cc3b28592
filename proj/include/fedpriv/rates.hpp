#pragma once

#include <span>
#include <string>
#include <vector>

#include "fedpriv/sequence_model.hpp"

namespace fedpriv {

// The summands of the separation-rate formulas, all with constant 1:
//   A        (sigma^2/(mn))^{2s/(2s+1/2)}                      classical
//   B_shared (sigma^2/(m n^{3/2} eps sqrt(1 ^ n eps^2)))^{2s/(2s+1)}
//   B_local  (sigma^2/(m n^2 eps^2))^{2s/(2s+3/2)}
//   C        (sigma^2/(sqrt(m) n sqrt(1 ^ n eps^2)))^{2s/(2s+1/2)}
//   D        sigma^2/(m n^2 eps^2)
struct RateTerms {
  double A;
  double B_shared;
  double B_local;
  double C;
  double D;
};

RateTerms rate_terms(const ModelConfig& cfg);

// rho^2 for protocols with shared randomness. Capped by the local rate since
// every local-randomness protocol is also a shared-randomness protocol.
double separation_rate_shared(const ModelConfig& cfg);
// rho^2 for local-randomness protocols. The high-budget branch is vacuous
// for m = 1 and for s <= 1/4.
double separation_rate_local(const ModelConfig& cfg);
double separation_rate(const ModelConfig& cfg, bool shared);

struct RegimeReport {
  int regime_id = 0;          // 1..6, from the summands attaining the value
  std::string dominant_term;  // classical | high_budget | low_budget | floor
  double rho_squared = 0;     // formula value
  double branch_value = 0;    // sum of the active summands
  int case_regime = 0;        // first matching threshold condition, 1..6
  bool shared = false;
};

RegimeReport classify_regime(const ModelConfig& cfg, bool shared);

// Threshold case lists in epsilon; first satisfied condition wins.
int case_regime(const ModelConfig& cfg, bool shared);

// Exponent a in rho ~ eps^a inside the given regime.
double regime_rho_exponent(int regime_id, double s, bool shared);

// floor(log2(1/rho_s) / s) v 1, capped at 30.
int optimal_resolution(const ModelConfig& cfg, bool shared);

// Logarithmic slack M_N^2 = ln ln N * ln^{3/2} N * ln(1/delta); NaN when
// undefined (N < 3 or delta = 0).
double log_multiplier_squared(const ModelConfig& cfg);

struct RateRow {
  double epsilon;
  double rho2;
  int regime_id;
  int case_regime;
  bool shared;
};

std::vector<RateRow> rate_curve(const ModelConfig& base,
                                std::span<const double> eps_grid, bool shared);

// n_points log-spaced values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int n_points);

}  // namespace fedpriv
