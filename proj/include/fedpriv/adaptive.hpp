#pragma once

#include <cstdint>
#include <vector>

#include "fedpriv/protocols.hpp"
#include "fedpriv/sequence_model.hpp"

namespace fedpriv {

struct ResolutionGrid {
  std::vector<int> levels;  // ascending, deduplicated
  double s_min = 0;
  double s_max = 0;
  bool shared = false;
  std::vector<int> low_set;
  std::vector<int> high_set;
};

// Smoothness mesh over [s_min, s_max] with step about 1/ln N and at least
// three points (one point when s_min == s_max); each s maps to its optimal
// resolution level.
std::vector<double> smoothness_mesh(const ModelConfig& cfg, double s_min,
                                    double s_max);

ResolutionGrid resolution_grid(const ModelConfig& cfg, double s_min,
                               double s_max, bool shared);

struct GridPartition {
  std::vector<int> low;
  std::vector<int> high;
};

// Local: L is low iff 2^L <= eps sqrt(mn) (1 + sqrt(n) 1{sqrt(n) eps > 1}).
// Shared: L is low iff 2^L <= eps^2 m n.
GridPartition partition_grid(const std::vector<int>& levels,
                             const ModelConfig& cfg, bool shared);

// Adaptive threshold test on the low levels combined with the coordinate
// (local) or rotated (shared) test on the high levels. Both halves run on
// (eps/2, delta/2); the combined statistic is the larger of the two
// normalized maxima, so one critical value serves both.
ProtocolPlan make_adaptive_plan(const ModelConfig& cfg,
                                const ResolutionGrid& grid);

TestOutcome adaptive_test_local(const DistributedData& data,
                                const ModelConfig& cfg,
                                const ResolutionGrid& grid, double kappa,
                                std::uint64_t noise_seed);

TestOutcome adaptive_test_shared(const DistributedData& data,
                                 const ModelConfig& cfg,
                                 const ResolutionGrid& grid, double kappa,
                                 std::uint64_t noise_seed);

}  // namespace fedpriv
