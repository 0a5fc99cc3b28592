#include "fedpriv/protocols.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "fedpriv/errors.hpp"
#include "fedpriv/parallel.hpp"

namespace fedpriv {

namespace {

// ||sum_i x_i||^2 / (n sigma^2) = ||sqrt(n) xbar / sigma||^2.
double scaled_mean_energy(BlockView block, double sigma) {
  const int d = block.dim();
  std::vector<double> total(d, 0.0);
  for (int i = 0; i < block.size(); ++i) {
    auto x = block.row(i);
    for (int c = 0; c < d; ++c) total[c] += x[c];
  }
  double sq = 0.0;
  for (double v : total) sq += v * v;
  return sq / (block.size() * sigma * sigma);
}

double log_normalizer(double count) {
  return std::sqrt(std::max(std::log(count), 1.0));
}

// ceil(n eps^2 ^ d_L), guarding against n * eps^2 landing a rounding error
// above an integer.
int budget_coordinates(int n, double epsilon, int L) {
  const double d = static_cast<double>(dimension(L));
  const double raw = std::min(n * epsilon * epsilon, d);
  return std::max(1, static_cast<int>(std::ceil(raw * (1.0 - 1e-12))));
}

constexpr std::uint64_t protocol_id(Protocol p) {
  return static_cast<std::uint64_t>(p) + 1;
}

}  // namespace

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::classical:
      return "classical";
    case Protocol::I:
      return "I";
    case Protocol::II:
      return "II";
    case Protocol::III:
      return "III";
    case Protocol::adaptive_local:
      return "adaptive-local";
    case Protocol::adaptive_shared:
      return "adaptive-shared";
  }
  return "unknown";
}

Protocol parse_protocol(const std::string& name) {
  for (Protocol p : {Protocol::classical, Protocol::I, Protocol::II,
                     Protocol::III, Protocol::adaptive_local,
                     Protocol::adaptive_shared}) {
    if (name == to_string(p)) return p;
  }
  throw ConfigError("unknown protocol '" + name +
                    "' (expected classical, I, II, III, adaptive-local or "
                    "adaptive-shared)");
}

bool is_adaptive(Protocol p) {
  return p == Protocol::adaptive_local || p == Protocol::adaptive_shared;
}

bool rejects(double statistic, double kappa) {
  return statistic > -std::numeric_limits<double>::infinity() &&
         statistic >= kappa;
}

double classical_stat(BlockView block, double sigma) {
  const double d = block.dim();
  return (scaled_mean_energy(block, sigma) - d) / std::sqrt(d);
}

double classical_stat_pooled(const DistributedData& data, int L, double sigma) {
  const int d = static_cast<int>(dimension(L));
  std::vector<double> total(d, 0.0);
  long long count = 0;
  for (const auto& server : data.servers) {
    BlockView v = server.view(L);
    for (int i = 0; i < v.size(); ++i) {
      auto x = v.row(i);
      for (int c = 0; c < d; ++c) total[c] += x[c];
    }
    count += v.size();
  }
  double sq = 0.0;
  for (double t : total) sq += t * t;
  const double energy = sq / (static_cast<double>(count) * sigma * sigma);
  return (energy - d) / std::sqrt(static_cast<double>(d));
}

double stat_I(BlockView block, double tau, double sigma, double V) {
  const double d = block.dim();
  return clip((scaled_mean_energy(block, sigma) - V) / std::sqrt(d), -tau, tau);
}

double stat_I(BlockView block, double tau, double sigma, Engine& eng) {
  return stat_I(block, tau, sigma, chi_squared(eng, block.dim()));
}

std::vector<double> thresholds_T_L(int L, int n, double sigma, double R,
                                   long long N, double s, double q) {
  if (!(R > 0) || !(sigma > 0)) {
    throw std::invalid_argument("R and sigma must be positive");
  }
  const double raw =
      std::ceil(1.0 + 2.0 * std::log2(static_cast<double>(N) * R / sigma));
  const int count = std::max(1, static_cast<int>(raw));
  const double expo = std::isinf(q) ? 2.0 : 2.0 - 2.0 / q;
  const double coef = std::pow(1.0 - std::exp2(-s), expo);
  const double top = 2.0 * n * coef * R * R /
                     (sigma * sigma * std::sqrt(std::exp2(L)));
  std::vector<double> taus(count);
  for (int k = 1; k <= count; ++k) taus[k - 1] = top * std::exp2(1 - k);
  return taus;
}

ThresholdPlan threshold_plan(const ModelConfig& cfg, int L) {
  ThresholdPlan plan;
  plan.L = L;
  const auto taus =
      thresholds_T_L(L, cfg.n, cfg.sigma, cfg.R, cfg.N(), cfg.s, cfg.q);
  plan.components = static_cast<int>(taus.size());
  plan.delta = cfg.delta;
  for (double tau : taus) {
    const double D = lipschitz_constant(cfg.n, L, tau, cfg.N(), cfg.kappa_tilde);
    plan.releases.push_back(
        {tau, D, gamma_threshold(D, cfg.epsilon, cfg.delta, plan.components)});
  }
  return plan;
}

ThresholdPlan threshold_plan_adaptive(const ModelConfig& cfg, int L,
                                      int low_levels) {
  ThresholdPlan plan;
  plan.L = L;
  const auto taus =
      thresholds_T_L(L, cfg.n, cfg.sigma, cfg.R, cfg.N(), cfg.s, cfg.q);
  const int t = static_cast<int>(taus.size());
  plan.components = t * low_levels;
  plan.delta = cfg.delta / 2;
  plan.group = 1;
  for (double tau : taus) {
    const double D = lipschitz_constant(cfg.n, L, tau, cfg.N(), cfg.kappa_tilde);
    plan.releases.push_back(
        {tau, D,
         gamma_threshold_adaptive(D, cfg.epsilon, cfg.delta, t, low_levels)});
  }
  return plan;
}

Transcript transcript_I(int server_id, BlockView block,
                        const ThresholdPlan& plan, double sigma, Engine& eng,
                        std::span<const double> injected_V) {
  if (!injected_V.empty() && injected_V.size() != plan.releases.size()) {
    throw std::invalid_argument("one injected chi-square draw per threshold");
  }
  const double energy = scaled_mean_energy(block, sigma);
  const double d = block.dim();
  Transcript t;
  t.server_id = server_id;
  t.tag = TranscriptTag::I;
  t.payload.reserve(plan.releases.size());
  t.records.reserve(plan.releases.size());
  for (std::size_t r = 0; r < plan.releases.size(); ++r) {
    const auto& rel = plan.releases[r];
    const double V = injected_V.empty() ? chi_squared(eng, d) : injected_V[r];
    const double stat = clip((energy - V) / std::sqrt(d), -rel.tau, rel.tau);
    t.payload.push_back(rel.gamma * stat + standard_normal(eng));
    t.records.push_back({rel.lipschitz, rel.gamma, 1.0, plan.components,
                         plan.delta, plan.group});
  }
  return t;
}

double threshold_statistic(std::span<const Transcript> transcripts,
                           const ThresholdPlan& plan) {
  const std::size_t T = plan.releases.size();
  if (transcripts.empty()) throw std::invalid_argument("no transcripts");
  for (const auto& t : transcripts) {
    if (t.payload.size() != T) {
      throw std::invalid_argument(
          "transcript threshold set does not match the plan");
    }
  }
  const double root_m = std::sqrt(static_cast<double>(transcripts.size()));
  const double norm = log_normalizer(plan.components);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < T; ++r) {
    double sum = 0.0;
    for (const auto& t : transcripts) sum += t.payload[r];
    const double g = std::max(plan.releases[r].gamma, 1.0);
    best = std::max(best, sum / (root_m * g * norm));
  }
  return best;
}

TestOutcome test_I(std::span<const Transcript> transcripts,
                   const ThresholdPlan& plan, double kappa) {
  TestOutcome out;
  out.protocol = Protocol::I;
  out.statistic = threshold_statistic(transcripts, plan);
  out.critical_value = kappa;
  out.reject = rejects(out.statistic, kappa);
  out.rejecting_level = out.reject ? plan.L : 0;
  return out;
}

int Assignment::max_load() const {
  std::size_t load = 0;
  for (const auto& c : server_coordinates) load = std::max(load, c.size());
  return static_cast<int>(load);
}

Assignment partition_servers(int m, int L, int n, double epsilon) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  Assignment a;
  a.m = m;
  a.L = L;
  const int d = static_cast<int>(dimension(L));
  a.K = budget_coordinates(n, epsilon, L);
  a.set_size = static_cast<int>(
      (static_cast<long long>(m) * a.K + d - 1) / d);
  a.coordinate_servers.assign(d, {});
  a.server_coordinates.assign(m, {});
  a.coordinate_slots.assign(d, {});
  // Slots are enumerated coordinate-major and dealt to servers in turn.
  for (int c = 0; c < d; ++c) {
    for (int r = 0; r < a.set_size; ++r) {
      const int j = static_cast<int>(
          (static_cast<long long>(c) * a.set_size + r) % m);
      a.coordinate_servers[c].push_back(j);
      a.coordinate_slots[c].emplace_back(
          j, static_cast<int>(a.server_coordinates[j].size()));
      a.server_coordinates[j].push_back(c);
    }
  }
  return a;
}

double clip_level_coordinate(const ModelConfig& cfg) {
  const double ratio = static_cast<double>(cfg.N()) / cfg.sigma;
  if (!(ratio > 1.0)) {
    throw ConfigError("clipping level needs N / sigma > 1");
  }
  return cfg.kappa_tilde * std::sqrt(std::log(ratio));
}

namespace {

CoordinatePlan coordinate_plan_common(const ModelConfig& cfg, int L) {
  CoordinatePlan plan;
  plan.L = L;
  plan.assignment = partition_servers(cfg.m, L, cfg.n, cfg.epsilon);
  plan.tau = clip_level_coordinate(cfg);
  const double K = plan.assignment.K;
  plan.eta = cfg.n * cfg.epsilon * cfg.epsilon / (4.0 * K * plan.tau * plan.tau);
  plan.scale = std::max(plan.eta, 1.0);
  return plan;
}

void finish_coordinate_plan(CoordinatePlan& plan, int n) {
  plan.center =
      n * plan.gamma * plan.gamma * clipped_second_moment(plan.tau, 1.0) + 1.0;
}

}  // namespace

CoordinatePlan coordinate_plan(const ModelConfig& cfg, int L) {
  CoordinatePlan plan = coordinate_plan_common(cfg, L);
  // Servers carrying more than K coordinates (uneven round-robin) get the
  // noise their actual load requires.
  const double load = plan.assignment.max_load();
  plan.gamma = gamma_coordinate(cfg.epsilon, cfg.delta, load, plan.tau);
  plan.delta = cfg.delta;
  finish_coordinate_plan(plan, cfg.n);
  return plan;
}

CoordinatePlan coordinate_plan_adaptive(const ModelConfig& cfg, int L,
                                        int high_levels) {
  CoordinatePlan plan = coordinate_plan_common(cfg, L);
  const double load = plan.assignment.max_load();
  plan.gamma = gamma_coordinate_adaptive(cfg.epsilon, cfg.delta, load,
                                         high_levels, plan.tau);
  plan.delta = cfg.delta / 2;
  plan.group = 2;
  finish_coordinate_plan(plan, cfg.n);
  return plan;
}

Transcript transcript_II(int server_id, BlockView block,
                         const CoordinatePlan& plan, double sigma, Engine& eng) {
  const auto& coords = plan.assignment.server_coordinates.at(server_id);
  if (block.dim() != static_cast<int>(dimension(plan.L))) {
    throw std::invalid_argument("block is not truncated to the plan level");
  }
  Transcript t;
  t.server_id = server_id;
  t.tag = TranscriptTag::II;
  t.payload.reserve(coords.size());
  const double inv_sigma = 1.0 / sigma;
  for (int c : coords) {
    double sum = 0.0;
    for (int i = 0; i < block.size(); ++i) {
      sum += clip(block.row(i)[c] * inv_sigma, -plan.tau, plan.tau);
    }
    t.payload.push_back(plan.gamma * sum + standard_normal(eng));
  }
  if (!coords.empty()) {
    const auto load = static_cast<double>(coords.size());
    t.records.push_back({2.0 * plan.tau * std::sqrt(load), plan.gamma, 1.0,
                         static_cast<int>(coords.size()), plan.delta,
                         plan.group});
  }
  return t;
}

double coordinate_statistic(std::span<const Transcript> transcripts,
                            const Assignment& assignment, double center,
                            double scale) {
  if (static_cast<int>(transcripts.size()) != assignment.m) {
    throw std::invalid_argument("one transcript per server is required");
  }
  for (int j = 0; j < assignment.m; ++j) {
    if (transcripts[j].payload.size() !=
        assignment.server_coordinates[j].size()) {
      throw std::invalid_argument("transcript does not match the assignment");
    }
  }
  const auto d = assignment.coordinate_slots.size();
  double acc = 0.0;
  for (const auto& slots : assignment.coordinate_slots) {
    double sum = 0.0;
    for (const auto& [j, pos] : slots) sum += transcripts[j].payload[pos];
    const double z = sum / std::sqrt(static_cast<double>(slots.size()));
    acc += z * z - center;
  }
  return acc / (std::sqrt(static_cast<double>(d)) * scale);
}

TestOutcome test_II(std::span<const Transcript> transcripts,
                    const Assignment& assignment, double kappa, double center,
                    double scale) {
  TestOutcome out;
  out.protocol = Protocol::II;
  out.statistic = coordinate_statistic(transcripts, assignment, center, scale);
  out.critical_value = kappa;
  out.reject = rejects(out.statistic, kappa);
  out.rejecting_level = out.reject ? assignment.L : 0;
  return out;
}

SharedRandomness haar_rotation(int d, std::uint64_t seed) {
  return haar_rotation(d, seed, d);
}

SharedRandomness haar_rotation(int d, std::uint64_t seed, int rows) {
  if (d < 1 || rows < 1 || rows > d) {
    throw std::invalid_argument("haar_rotation needs 1 <= rows <= d");
  }
  // U = Q^T where G = QR with diag(R) > 0; the first k columns of Q only
  // depend on the first k columns of G, which are filled first.
  Engine eng = make_engine(seed);
  Eigen::MatrixXd G(d, rows);
  for (int c = 0; c < rows; ++c) {
    for (int r = 0; r < d; ++r) G(r, c) = standard_normal(eng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d, rows);
  const Eigen::MatrixXd& packed = qr.matrixQR();
  SharedRandomness out;
  out.d = d;
  out.rows = rows;
  out.seed = seed;
  out.rotation.resize(static_cast<std::size_t>(rows) * d);
  for (int r = 0; r < rows; ++r) {
    const double sign = packed(r, r) < 0 ? -1.0 : 1.0;
    for (int c = 0; c < d; ++c) {
      out.rotation[static_cast<std::size_t>(r) * d + c] = sign * Q(c, r);
    }
  }
  return out;
}

namespace {

RotationPlan rotation_plan_common(const ModelConfig& cfg, int L) {
  RotationPlan plan;
  plan.L = L;
  plan.K = budget_coordinates(cfg.n, cfg.epsilon, L);
  const int levels =
      static_cast<int>(std::ceil(std::log2(static_cast<double>(plan.K)) - 1e-12));
  plan.retained_level = std::clamp(levels, 1, L);
  plan.retained = static_cast<int>(dimension(plan.retained_level));
  plan.tau = clip_level_coordinate(cfg);
  return plan;
}

// K used in the noise scale: K_L unless the retained coordinates would then
// exceed the sensitivity budget the ln N factor allows for.
double rotation_privacy_K(const RotationPlan& plan, long long N) {
  return std::max<double>(plan.K,
                          plan.retained / std::log(static_cast<double>(N)));
}

void finish_rotation_plan(RotationPlan& plan, const ModelConfig& cfg) {
  const double ng2 = cfg.n * plan.gamma * plan.gamma;
  plan.center = ng2 * clipped_second_moment(plan.tau, cfg.sigma) + 1.0;
  plan.scale = std::max(ng2, 1.0);
}

}  // namespace

RotationPlan rotation_plan(const ModelConfig& cfg, int L) {
  RotationPlan plan = rotation_plan_common(cfg, L);
  plan.gamma = gamma_rotated(cfg.epsilon, cfg.delta,
                             rotation_privacy_K(plan, cfg.N()), cfg.N(),
                             plan.tau);
  plan.delta = cfg.delta;
  finish_rotation_plan(plan, cfg);
  return plan;
}

RotationPlan rotation_plan_adaptive(const ModelConfig& cfg, int L,
                                    int high_levels) {
  RotationPlan plan = rotation_plan_common(cfg, L);
  plan.gamma = gamma_rotated_adaptive(cfg.epsilon, cfg.delta,
                                      rotation_privacy_K(plan, cfg.N()),
                                      high_levels, cfg.N(), plan.tau);
  plan.delta = cfg.delta / 2;
  plan.group = 2;
  finish_rotation_plan(plan, cfg);
  return plan;
}

Transcript transcript_III(int server_id, BlockView block,
                          const SharedRandomness& shared,
                          const RotationPlan& plan, Engine& eng) {
  if (shared.d != block.dim() ||
      block.dim() != static_cast<int>(dimension(plan.L))) {
    throw std::invalid_argument(
        "shared rotation dimension does not match the block");
  }
  if (shared.rows < plan.retained) {
    throw std::invalid_argument("shared rotation has too few rows");
  }
  Transcript t;
  t.server_id = server_id;
  t.tag = TranscriptTag::III;
  t.payload.reserve(plan.retained);
  const int d = block.dim();
  for (int r = 0; r < plan.retained; ++r) {
    auto u = shared.row(r);
    double sum = 0.0;
    for (int i = 0; i < block.size(); ++i) {
      auto x = block.row(i);
      double proj = 0.0;
      for (int c = 0; c < d; ++c) proj += u[c] * x[c];
      sum += clip(proj, -plan.tau, plan.tau);
    }
    t.payload.push_back(plan.gamma * sum + standard_normal(eng));
  }
  t.records.push_back({2.0 * plan.tau * std::sqrt(double(plan.retained)),
                       plan.gamma, 1.0, plan.retained, plan.delta, plan.group});
  return t;
}

double rotated_statistic(std::span<const Transcript> transcripts, int K,
                         double center, double scale) {
  if (transcripts.empty()) throw std::invalid_argument("no transcripts");
  const std::size_t kept = transcripts.front().payload.size();
  for (const auto& t : transcripts) {
    if (t.payload.size() != kept) {
      throw std::invalid_argument("transcripts disagree on retained indices");
    }
  }
  const double root_m = std::sqrt(static_cast<double>(transcripts.size()));
  double acc = 0.0;
  for (std::size_t r = 0; r < kept; ++r) {
    double sum = 0.0;
    for (const auto& t : transcripts) sum += t.payload[r];
    const double z = sum / root_m;
    acc += z * z - center;
  }
  return acc / (std::sqrt(static_cast<double>(K)) * scale);
}

TestOutcome test_III(std::span<const Transcript> transcripts, int K,
                     double kappa, double center, double scale) {
  TestOutcome out;
  out.protocol = Protocol::III;
  out.statistic = rotated_statistic(transcripts, K, center, scale);
  out.critical_value = kappa;
  out.reject = rejects(out.statistic, kappa);
  return out;
}

ProtocolPlan make_plan(Protocol protocol, const ModelConfig& cfg, int L) {
  cfg.validate();
  if (is_adaptive(protocol)) {
    throw std::invalid_argument("adaptive plans are built from a grid");
  }
  if (L < 1 || L > 20) throw ConfigError("resolution level L must be in 1..20");
  ProtocolPlan plan;
  plan.protocol = protocol;
  plan.cfg = cfg;
  plan.max_level = L;
  switch (protocol) {
    case Protocol::classical:
      plan.classical_level = L;
      break;
    case Protocol::I:
      plan.low.push_back(threshold_plan(cfg, L));
      plan.low_count = 1;
      break;
    case Protocol::II:
      plan.coordinate.push_back(coordinate_plan(cfg, L));
      plan.high_count = 1;
      break;
    case Protocol::III:
      plan.rotated.push_back(rotation_plan(cfg, L));
      plan.high_count = 1;
      break;
    default:
      break;
  }
  return plan;
}

Evaluation evaluate(const ProtocolPlan& plan, const DistributedData& data,
                    std::uint64_t noise_seed, bool keep_records) {
  const ModelConfig& cfg = plan.cfg;
  if (static_cast<int>(data.servers.size()) != cfg.m) {
    throw std::invalid_argument("data has the wrong number of servers");
  }
  const std::uint64_t base =
      derive_seed(noise_seed, {tag(Stream::noise), protocol_id(plan.protocol)});
  Evaluation ev;
  ev.statistic = -std::numeric_limits<double>::infinity();
  auto consider = [&ev](double stat, int L) {
    if (stat > ev.statistic) {
      ev.statistic = stat;
      ev.level = L;
    }
  };
  std::vector<Transcript> transcripts(cfg.m);

  if (plan.classical_level > 0) {
    consider(classical_stat_pooled(data, plan.classical_level, cfg.sigma),
             plan.classical_level);
  }
  for (std::size_t a = 0; a < plan.low.size(); ++a) {
    const auto& sub = plan.low[a];
    for (int j = 0; j < cfg.m; ++j) {
      Engine eng = make_engine(base, {1, a, static_cast<std::uint64_t>(j)});
      transcripts[j] =
          transcript_I(j, data.servers[j].view(sub.L), sub, cfg.sigma, eng);
    }
    consider(threshold_statistic(transcripts, sub), sub.L);
    if (keep_records) {
      ev.records.insert(ev.records.end(), transcripts[0].records.begin(),
                        transcripts[0].records.end());
    }
  }
  for (std::size_t b = 0; b < plan.coordinate.size(); ++b) {
    const auto& sub = plan.coordinate[b];
    for (int j = 0; j < cfg.m; ++j) {
      Engine eng = make_engine(base, {2, b, static_cast<std::uint64_t>(j)});
      transcripts[j] =
          transcript_II(j, data.servers[j].view(sub.L), sub, cfg.sigma, eng);
    }
    consider(coordinate_statistic(transcripts, sub.assignment, sub.center,
                                  sub.scale) /
                 plan.high_normalizer,
             sub.L);
    if (keep_records) {
      ev.records.insert(ev.records.end(), transcripts[0].records.begin(),
                        transcripts[0].records.end());
    }
  }
  for (std::size_t c = 0; c < plan.rotated.size(); ++c) {
    const auto& sub = plan.rotated[c];
    const SharedRandomness shared =
        haar_rotation(static_cast<int>(dimension(sub.L)),
                      derive_seed(base, {tag(Stream::shared), c}), sub.retained);
    for (int j = 0; j < cfg.m; ++j) {
      Engine eng = make_engine(base, {3, c, static_cast<std::uint64_t>(j)});
      transcripts[j] =
          transcript_III(j, data.servers[j].view(sub.L), shared, sub, eng);
    }
    consider(rotated_statistic(transcripts, sub.K, sub.center, sub.scale) /
                 plan.high_normalizer,
             sub.L);
    if (keep_records) {
      ev.records.insert(ev.records.end(), transcripts[0].records.begin(),
                        transcripts[0].records.end());
    }
  }
  return ev;
}

Evaluation simulate(const ProtocolPlan& plan, const Signal& f,
                    std::uint64_t rep_seed, bool keep_records) {
  const DistributedData data =
      sample_data(f, plan.cfg, plan.max_level,
                  derive_seed(rep_seed, {tag(Stream::data)}));
  return evaluate(plan, data, derive_seed(rep_seed, {tag(Stream::noise)}),
                  keep_records);
}

std::vector<double> null_statistics(const ProtocolPlan& plan, int reps,
                                    std::uint64_t seed, int workers) {
  std::vector<double> stats(reps);
  const Signal zero;
  parallel_for(reps, workers, [&](std::size_t r) {
    stats[r] = simulate(plan, zero,
                        derive_seed(seed, {tag(Stream::calibration), r}))
                   .statistic;
  });
  return stats;
}

double empirical_critical_value(std::vector<double> stats, double alpha) {
  if (stats.empty()) throw std::invalid_argument("no statistics");
  if (!(alpha > 0) || !(alpha <= 1)) {
    throw std::invalid_argument("alpha must lie in (0, 1]");
  }
  std::sort(stats.begin(), stats.end());
  const auto reps = stats.size();
  const auto exceed = static_cast<std::size_t>(
      std::floor(alpha * static_cast<double>(reps) + 1e-9));
  if (exceed == 0) return std::numeric_limits<double>::infinity();
  return stats[reps - exceed];
}

double calibrate_threshold(const ProtocolPlan& plan, double alpha, int reps,
                           std::uint64_t seed, int workers) {
  if (reps < 1000) {
    throw ConfigError("calibration needs at least 1000 replications");
  }
  return empirical_critical_value(null_statistics(plan, reps, seed, workers),
                                  alpha);
}

TestOutcome decide(const ProtocolPlan& plan, const Evaluation& ev,
                   double kappa) {
  TestOutcome out;
  out.protocol = plan.protocol;
  out.statistic = ev.statistic;
  out.critical_value = kappa;
  out.reject = rejects(ev.statistic, kappa);
  out.rejecting_level = out.reject ? ev.level : 0;
  return out;
}

}  // namespace fedpriv
