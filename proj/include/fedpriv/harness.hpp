#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fedpriv/protocols.hpp"
#include "fedpriv/sequence_model.hpp"

namespace fedpriv {

double binomial_se(double p, int reps);

struct RiskEstimate {
  double type_i = 0;
  double type_ii = 0;
  int reps = 0;
  double se_i = 0;
  double se_ii = 0;
  double critical_value = 0;
  std::string config_hash;
};

// Null replications use substreams (seed, null_reps, r) and alternative
// replications (seed, alt_reps, r); the threshold kappa is reused throughout.
RiskEstimate estimate_risk(const ProtocolPlan& plan, double kappa,
                           const Signal& alternative, int reps,
                           std::uint64_t seed, int workers = 1);

// Calibrates on the (seed, calibration) substream first.
RiskEstimate estimate_risk(const ProtocolPlan& plan, const Signal& alternative,
                           int reps, int calibration_reps, std::uint64_t seed,
                           int workers = 1);

// Rejection indicators for `reps` alternative replications. The data
// substreams depend only on (seed, r), so different protocols and different
// signals see common random numbers.
std::vector<unsigned char> rejections(const ProtocolPlan& plan, double kappa,
                                      const Signal& f, int reps,
                                      std::uint64_t seed, int workers = 1);

double empirical_power(const ProtocolPlan& plan, double kappa, const Signal& f,
                       int reps, std::uint64_t seed, int workers = 1);

struct BoundaryOptions {
  Spread spread = Spread::spike;
  int level = 0;  // level carrying the alternative; 0 = plan.max_level
  int reps_per_probe = 1000;
  double tol_rel = 0.05;
  double initial_rho = 1.0;
};

struct BoundaryEstimate {
  double rho_star = 0;
  double target_power = 0;
  double lo = 0;
  double hi = 0;
  double power_lo = 0;
  double power_hi = 0;
  int iterations = 0;
};

// Geometric bisection on rho for the single-level alternative. Every probe
// reuses the same replication substreams, which keeps the empirical power
// curve monotone up to Monte Carlo noise in the clipping.
BoundaryEstimate detection_boundary(const ProtocolPlan& plan, double kappa,
                                    double target_power,
                                    const BoundaryOptions& options,
                                    std::uint64_t seed, int workers = 1);

struct ComparisonRow {
  Protocol protocol;
  double rho;
  double power;
  double se;
  double critical_value;
};

// Power of classical, I, II and III at each rho with common data.
std::vector<ComparisonRow> compare_protocols(const ModelConfig& cfg, int L,
                                             std::span<const double> rho_grid,
                                             Spread spread, int reps,
                                             int calibration_reps,
                                             std::uint64_t seed,
                                             int workers = 1);

// ------------------------------------------------------------ persistence

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

std::string format_number(double v);

// FNV-1a of the text, as 16 hex digits.
std::string run_id(const std::string& canonical_text);

// Comment lines (each prefixed with "# ") followed by the header row.
void write_csv(std::ostream& out, const Table& table,
               const std::vector<std::string>& preamble);

}  // namespace fedpriv
