#include "fedpriv/harness.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fedpriv/errors.hpp"
#include "fedpriv/parallel.hpp"

namespace fedpriv {

double binomial_se(double p, int reps) {
  if (reps < 1) throw std::invalid_argument("reps must be positive");
  return std::sqrt(p * (1.0 - p) / reps);
}

std::vector<unsigned char> rejections(const ProtocolPlan& plan, double kappa,
                                      const Signal& f, int reps,
                                      std::uint64_t seed, int workers) {
  std::vector<unsigned char> out(reps);
  parallel_for(reps, workers, [&](std::size_t r) {
    const double stat =
        simulate(plan, f, derive_seed(seed, {tag(Stream::alt_reps), r}))
            .statistic;
    out[r] = rejects(stat, kappa) ? 1 : 0;
  });
  return out;
}

namespace {

double mean_of(const std::vector<unsigned char>& v) {
  long long hits = 0;
  for (unsigned char x : v) hits += x;
  return static_cast<double>(hits) / static_cast<double>(v.size());
}

}  // namespace

double empirical_power(const ProtocolPlan& plan, double kappa, const Signal& f,
                       int reps, std::uint64_t seed, int workers) {
  return mean_of(rejections(plan, kappa, f, reps, seed, workers));
}

RiskEstimate estimate_risk(const ProtocolPlan& plan, double kappa,
                           const Signal& alternative, int reps,
                           std::uint64_t seed, int workers) {
  if (reps < 100) throw ConfigError("risk estimation needs at least 100 reps");
  std::vector<unsigned char> null_hits(reps);
  const Signal zero;
  parallel_for(reps, workers, [&](std::size_t r) {
    const double stat =
        simulate(plan, zero, derive_seed(seed, {tag(Stream::null_reps), r}))
            .statistic;
    null_hits[r] = rejects(stat, kappa) ? 1 : 0;
  });
  RiskEstimate est;
  est.reps = reps;
  est.critical_value = kappa;
  est.type_i = mean_of(null_hits);
  est.type_ii =
      1.0 - empirical_power(plan, kappa, alternative, reps, seed, workers);
  est.se_i = binomial_se(est.type_i, reps);
  est.se_ii = binomial_se(est.type_ii, reps);
  const ModelConfig& c = plan.cfg;
  std::ostringstream key;
  key << to_string(plan.protocol) << ' ' << plan.max_level << ' ' << c.m << ' '
      << c.n << ' ' << format_number(c.sigma) << ' ' << format_number(c.s) << ' '
      << format_number(c.R) << ' ' << format_number(c.p) << ' '
      << format_number(c.q) << ' ' << format_number(c.epsilon) << ' '
      << format_number(c.delta) << ' ' << format_number(c.alpha) << ' '
      << format_number(c.kappa_tilde) << ' ' << seed << ' ' << reps << ' '
      << format_number(kappa);
  est.config_hash = run_id(key.str());
  return est;
}

RiskEstimate estimate_risk(const ProtocolPlan& plan, const Signal& alternative,
                           int reps, int calibration_reps, std::uint64_t seed,
                           int workers) {
  const double kappa =
      calibrate_threshold(plan, plan.cfg.alpha, calibration_reps,
                          derive_seed(seed, {tag(Stream::calibration)}),
                          workers);
  return estimate_risk(plan, kappa, alternative, reps, seed, workers);
}

BoundaryEstimate detection_boundary(const ProtocolPlan& plan, double kappa,
                                    double target_power,
                                    const BoundaryOptions& options,
                                    std::uint64_t seed, int workers) {
  if (!(target_power > plan.cfg.alpha) || !(target_power < 1)) {
    throw ConfigError("target_power must lie in (alpha, 1)");
  }
  if (!(options.tol_rel > 0)) throw ConfigError("tol_rel must be positive");
  if (!(options.initial_rho > 0)) throw ConfigError("initial rho must be positive");
  const int L = options.level > 0 ? options.level : plan.max_level;
  if (L > plan.max_level) {
    throw ConfigError("alternative level exceeds the protocol's level");
  }
  BoundaryEstimate est;
  est.target_power = target_power;
  auto power = [&](double rho) {
    ++est.iterations;
    return empirical_power(plan, kappa,
                           gen_signal_single_level(L, rho, options.spread),
                           options.reps_per_probe, seed, workers);
  };

  double hi = options.initial_rho;
  double p_hi = power(hi);
  double lo = 0;
  double p_lo = 0;
  bool have_lo = false;
  int steps = 0;
  int flat = 0;
  while (p_hi < target_power) {
    // Clipping caps the power of the private tests; stop once doubling rho
    // no longer helps.
    if (++steps > 60 || flat >= 6) {
      char msg[160];
      std::snprintf(msg, sizeof msg,
                    "detection boundary: power levels off at %.3g below the "
                    "target %.3g (rho up to %.3g)",
                    p_hi, target_power, hi);
      throw RuntimeError(msg);
    }
    if (have_lo) flat = p_hi > p_lo + 0.01 ? 0 : flat + 1;
    lo = hi;
    p_lo = p_hi;
    have_lo = true;
    hi *= 2;
    p_hi = power(hi);
  }
  steps = 0;
  while (!have_lo) {
    const double cand = hi / 2;
    const double p = power(cand);
    if (p < target_power) {
      lo = cand;
      p_lo = p;
      have_lo = true;
    } else {
      hi = cand;
      p_hi = p;
      if (++steps > 60) break;  // power at or above target down to ~0
    }
  }
  if (have_lo) {
    while (hi / lo > 1.0 + options.tol_rel) {
      const double mid = std::sqrt(lo * hi);
      const double p = power(mid);
      if (p >= target_power) {
        hi = mid;
        p_hi = p;
      } else {
        lo = mid;
        p_lo = p;
      }
    }
    est.rho_star = std::sqrt(lo * hi);
  } else {
    lo = 0;
    p_lo = 0;
    est.rho_star = hi / 2;
  }
  est.lo = lo;
  est.hi = hi;
  est.power_lo = p_lo;
  est.power_hi = p_hi;
  return est;
}

std::vector<ComparisonRow> compare_protocols(const ModelConfig& cfg, int L,
                                             std::span<const double> rho_grid,
                                             Spread spread, int reps,
                                             int calibration_reps,
                                             std::uint64_t seed,
                                             int workers) {
  std::vector<ComparisonRow> rows;
  for (Protocol p :
       {Protocol::classical, Protocol::I, Protocol::II, Protocol::III}) {
    const ProtocolPlan plan = make_plan(p, cfg, L);
    const double kappa =
        calibrate_threshold(plan, cfg.alpha, calibration_reps,
                            derive_seed(seed, {tag(Stream::calibration)}),
                            workers);
    for (double rho : rho_grid) {
      const Signal f = rho > 0 ? gen_signal_single_level(L, rho, spread)
                               : Signal{};
      const double pw = empirical_power(plan, kappa, f, reps, seed, workers);
      rows.push_back({p, rho, pw, binomial_se(pw, reps), kappa});
    }
  }
  return rows;
}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size()) {
    throw std::logic_error("row width does not match the header");
  }
  rows.push_back(std::move(row));
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string run_id(const std::string& canonical_text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_csv(std::ostream& out, const Table& table,
               const std::vector<std::string>& preamble) {
  for (const auto& line : preamble) out << "# " << line << '\n';
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  emit(table.columns);
  for (const auto& row : table.rows) emit(row);
}

}  // namespace fedpriv
