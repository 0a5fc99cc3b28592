#include "fedpriv/adaptive.hpp"

#include <algorithm>
#include <cmath>

#include "fedpriv/errors.hpp"
#include "fedpriv/rates.hpp"

namespace fedpriv {

std::vector<double> smoothness_mesh(const ModelConfig& cfg, double s_min,
                                    double s_max) {
  if (!(s_min > 0) || !(s_max >= s_min)) {
    throw ConfigError("smoothness range needs 0 < s_min <= s_max");
  }
  if (s_min == s_max) return {s_min};
  const double lnN = std::log(static_cast<double>(cfg.N()));
  const int points =
      std::max(3, static_cast<int>(std::ceil((s_max - s_min) * lnN)) + 1);
  std::vector<double> mesh(points);
  for (int i = 0; i < points; ++i) {
    mesh[i] = s_min + (s_max - s_min) * i / (points - 1);
  }
  mesh.back() = s_max;
  return mesh;
}

ResolutionGrid resolution_grid(const ModelConfig& cfg, double s_min,
                               double s_max, bool shared) {
  ResolutionGrid grid;
  grid.s_min = s_min;
  grid.s_max = s_max;
  grid.shared = shared;
  for (double s : smoothness_mesh(cfg, s_min, s_max)) {
    ModelConfig at = cfg;
    at.s = s;
    grid.levels.push_back(optimal_resolution(at, shared));
  }
  std::sort(grid.levels.begin(), grid.levels.end());
  grid.levels.erase(std::unique(grid.levels.begin(), grid.levels.end()),
                    grid.levels.end());
  const double cap = 10.0 * std::log(static_cast<double>(cfg.N()));
  if (static_cast<double>(grid.levels.size()) > std::max(cap, 1.0)) {
    throw RuntimeError("resolution grid larger than 10 ln N");
  }
  GridPartition part = partition_grid(grid.levels, cfg, shared);
  grid.low_set = std::move(part.low);
  grid.high_set = std::move(part.high);
  return grid;
}

GridPartition partition_grid(const std::vector<int>& levels,
                             const ModelConfig& cfg, bool shared) {
  if (levels.empty()) throw std::invalid_argument("empty resolution grid");
  const double m = cfg.m;
  const double n = cfg.n;
  const double eps = cfg.epsilon;
  double bound = 0;
  if (shared) {
    bound = eps * eps * m * n;
  } else {
    const double boost = std::sqrt(n) * eps > 1.0 ? std::sqrt(n) : 0.0;
    bound = eps * std::sqrt(m * n) * (1.0 + boost);
  }
  GridPartition part;
  for (int L : levels) {
    (std::exp2(L) <= bound ? part.low : part.high).push_back(L);
  }
  return part;
}

ProtocolPlan make_adaptive_plan(const ModelConfig& cfg,
                                const ResolutionGrid& grid) {
  cfg.validate();
  if (grid.levels.empty()) throw std::invalid_argument("empty resolution grid");
  if (grid.levels.back() > 20) {
    throw ConfigError("resolution grid reaches level " +
                      std::to_string(grid.levels.back()) +
                      "; at most 20 is supported");
  }
  ProtocolPlan plan;
  plan.protocol = grid.shared ? Protocol::adaptive_shared
                              : Protocol::adaptive_local;
  plan.cfg = cfg;
  plan.max_level = grid.levels.back();
  plan.grid_size = static_cast<int>(grid.levels.size());
  plan.low_count = static_cast<int>(grid.low_set.size());
  plan.high_count = static_cast<int>(grid.high_set.size());
  for (int L : grid.low_set) {
    plan.low.push_back(threshold_plan_adaptive(cfg, L, plan.low_count));
  }
  for (int L : grid.high_set) {
    if (grid.shared) {
      plan.rotated.push_back(rotation_plan_adaptive(cfg, L, plan.high_count));
    } else {
      plan.coordinate.push_back(
          coordinate_plan_adaptive(cfg, L, plan.high_count));
    }
  }
  const double count = grid.shared ? plan.grid_size : plan.high_count;
  plan.high_normalizer =
      count > 0 ? std::sqrt(std::max(std::log(count), 1.0)) : 1.0;
  return plan;
}

namespace {

TestOutcome run_adaptive(const DistributedData& data, const ModelConfig& cfg,
                         const ResolutionGrid& grid, double kappa,
                         std::uint64_t noise_seed) {
  const ProtocolPlan plan = make_adaptive_plan(cfg, grid);
  if (data.level < plan.max_level) {
    throw std::invalid_argument("data are coarser than the resolution grid");
  }
  return decide(plan, evaluate(plan, data, noise_seed), kappa);
}

}  // namespace

TestOutcome adaptive_test_local(const DistributedData& data,
                                const ModelConfig& cfg,
                                const ResolutionGrid& grid, double kappa,
                                std::uint64_t noise_seed) {
  if (grid.shared) throw std::invalid_argument("grid was built for shared mode");
  return run_adaptive(data, cfg, grid, kappa, noise_seed);
}

TestOutcome adaptive_test_shared(const DistributedData& data,
                                 const ModelConfig& cfg,
                                 const ResolutionGrid& grid, double kappa,
                                 std::uint64_t noise_seed) {
  if (!grid.shared) throw std::invalid_argument("grid was built for local mode");
  return run_adaptive(data, cfg, grid, kappa, noise_seed);
}

}  // namespace fedpriv
