#pragma once

#include <cstdint>
#include <utility>
#include <span>
#include <string>
#include <vector>

#include "fedpriv/privacy.hpp"
#include "fedpriv/rng.hpp"
#include "fedpriv/sequence_model.hpp"

namespace fedpriv {

enum class Protocol { classical, I, II, III, adaptive_local, adaptive_shared };

std::string to_string(Protocol p);
Protocol parse_protocol(const std::string& name);
bool is_adaptive(Protocol p);

enum class TranscriptTag { classical, I, II, III };

struct Transcript {
  int server_id = 0;
  std::vector<double> payload;
  std::vector<MechanismRecord> records;
  TranscriptTag tag = TranscriptTag::I;
};

struct TestOutcome {
  bool reject = false;
  double statistic = 0;
  double critical_value = 0;
  Protocol protocol = Protocol::classical;
  int rejecting_level = 0;  // 0 when the test does not reject
};

// Ties reject; a statistic of -inf (no active sub-test) never rejects.
bool rejects(double statistic, double kappa);

// ---------------------------------------------------------------- classical

// (||sqrt(n) xbar / sigma||^2 - d) / sqrt(d) for one block.
double classical_stat(BlockView block, double sigma);
// Same statistic on the pooled sample of all servers, truncated to level L.
double classical_stat_pooled(const DistributedData& data, int L, double sigma);

// ------------------------------------------------------------- procedure I

double stat_I(BlockView block, double tau, double sigma, double V);
double stat_I(BlockView block, double tau, double sigma, Engine& eng);

// Clipping thresholds in descending order.
std::vector<double> thresholds_T_L(int L, int n, double sigma, double R,
                                   long long N, double s, double q);

struct ThresholdRelease {
  double tau;
  double lipschitz;
  double gamma;
};

struct ThresholdPlan {
  int L = 0;
  std::vector<ThresholdRelease> releases;
  // Releases sharing the budget; the statistic is normalized by
  // sqrt(ln(components) v 1).
  int components = 1;
  double delta = 0;
  int group = 0;
};

ThresholdPlan threshold_plan(const ModelConfig& cfg, int L);
ThresholdPlan threshold_plan_adaptive(const ModelConfig& cfg, int L,
                                      int low_levels);

// One release per threshold; V draws may be injected for testing.
Transcript transcript_I(int server_id, BlockView block,
                        const ThresholdPlan& plan, double sigma, Engine& eng,
                        std::span<const double> injected_V = {});

double threshold_statistic(std::span<const Transcript> transcripts,
                           const ThresholdPlan& plan);
TestOutcome test_I(std::span<const Transcript> transcripts,
                   const ThresholdPlan& plan, double kappa);

// ------------------------------------------------------------ procedure II

struct Assignment {
  int m = 0;
  int L = 0;
  int K = 0;         // ceil(n eps^2 ^ d_L)
  int set_size = 0;  // servers per coordinate, ceil(m K / d_L)
  std::vector<std::vector<int>> coordinate_servers;
  std::vector<std::vector<int>> server_coordinates;
  // For each coordinate, (server, position in that server's payload).
  std::vector<std::vector<std::pair<int, int>>> coordinate_slots;
  // Largest number of coordinates any server reports.
  int max_load() const;
};

Assignment partition_servers(int m, int L, int n, double epsilon);

struct CoordinatePlan {
  int L = 0;
  Assignment assignment;
  double tau = 0;
  double gamma = 0;
  double eta = 0;     // n eps^2 / (4 K tau^2)
  double center = 0;  // exact null second moment of an aggregated coordinate
  double scale = 1;   // eta v 1
  double delta = 0;
  int group = 0;
};

double clip_level_coordinate(const ModelConfig& cfg);  // kappa~ sqrt(ln(N/sigma))

CoordinatePlan coordinate_plan(const ModelConfig& cfg, int L);
CoordinatePlan coordinate_plan_adaptive(const ModelConfig& cfg, int L,
                                        int high_levels);

Transcript transcript_II(int server_id, BlockView block,
                         const CoordinatePlan& plan, double sigma, Engine& eng);

double coordinate_statistic(std::span<const Transcript> transcripts,
                            const Assignment& assignment, double center,
                            double scale);
TestOutcome test_II(std::span<const Transcript> transcripts,
                    const Assignment& assignment, double kappa, double center,
                    double scale);

// ----------------------------------------------------------- procedure III

// First `rows` rows of a Haar-distributed orthogonal d x d matrix U (row-major).
// Rows of a partial draw agree with the full draw for the same seed.
struct SharedRandomness {
  int d = 0;
  int rows = 0;
  std::vector<double> rotation;
  std::uint64_t seed = 0;

  std::span<const double> row(int r) const {
    return {rotation.data() + static_cast<std::ptrdiff_t>(r) * d,
            static_cast<std::size_t>(d)};
  }
};

SharedRandomness haar_rotation(int d, std::uint64_t seed);
SharedRandomness haar_rotation(int d, std::uint64_t seed, int rows);

struct RotationPlan {
  int L = 0;
  int K = 0;               // K_L as in procedure II
  int retained_level = 0;  // coordinates of levels 1..retained_level are kept
  int retained = 0;        // d at retained_level
  double tau = 0;
  double gamma = 0;
  double center = 0;  // exact null second moment
  double scale = 1;   // n gamma^2 v 1
  double delta = 0;
  int group = 0;
};

RotationPlan rotation_plan(const ModelConfig& cfg, int L);
RotationPlan rotation_plan_adaptive(const ModelConfig& cfg, int L,
                                    int high_levels);

Transcript transcript_III(int server_id, BlockView block,
                          const SharedRandomness& shared,
                          const RotationPlan& plan, Engine& eng);

double rotated_statistic(std::span<const Transcript> transcripts, int K,
                         double center, double scale);
TestOutcome test_III(std::span<const Transcript> transcripts, int K,
                     double kappa, double center, double scale);

// ------------------------------------------------------ full simulation

// Everything about a protocol that does not depend on the data: thresholds,
// mechanism scales, server assignments and normalizations.
struct ProtocolPlan {
  Protocol protocol = Protocol::classical;
  ModelConfig cfg;
  int max_level = 0;
  int classical_level = 0;
  std::vector<ThresholdPlan> low;
  std::vector<CoordinatePlan> coordinate;
  std::vector<RotationPlan> rotated;
  double high_normalizer = 1;
  int grid_size = 1;
  int low_count = 0;
  int high_count = 0;
};

// Non-adaptive protocols at a fixed resolution level.
ProtocolPlan make_plan(Protocol protocol, const ModelConfig& cfg, int L);

struct Evaluation {
  double statistic = 0;
  int level = 0;  // resolution level attaining the statistic
  std::vector<MechanismRecord> records;  // server 0's releases when requested
};

// Runs every server's transcript and the aggregation. Noise substreams are
// derived from noise_seed and the protocol, so two protocols evaluated with
// the same seed share data but not noise.
Evaluation evaluate(const ProtocolPlan& plan, const DistributedData& data,
                    std::uint64_t noise_seed, bool keep_records = false);

// One replication: data from derive_seed(rep_seed, data), then evaluate.
Evaluation simulate(const ProtocolPlan& plan, const Signal& f,
                    std::uint64_t rep_seed, bool keep_records = false);

std::vector<double> null_statistics(const ProtocolPlan& plan, int reps,
                                    std::uint64_t seed, int workers = 1);

// Smallest observed value such that at most floor(alpha * reps) statistics
// are >= it; +inf when that count is zero.
double empirical_critical_value(std::vector<double> stats, double alpha);

double calibrate_threshold(const ProtocolPlan& plan, double alpha, int reps,
                           std::uint64_t seed, int workers = 1);

TestOutcome decide(const ProtocolPlan& plan, const Evaluation& ev,
                   double kappa);

}  // namespace fedpriv
