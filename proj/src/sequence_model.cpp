#include "fedpriv/sequence_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "fedpriv/errors.hpp"
#include "fedpriv/rng.hpp"

namespace fedpriv {

std::size_t dimension(int L) {
  if (L < 1 || L > 40) {
    throw std::invalid_argument("resolution level must be in 1..40, got " +
                                std::to_string(L));
  }
  return (std::size_t{1} << (L + 1)) - 2;
}

double Signal::coeff(int l, int k) const {
  if (l < 1 || l > max_level()) return 0.0;
  if (k < 1 || k > (1 << l)) {
    throw std::out_of_range("coefficient index out of range");
  }
  return levels_[l - 1][k - 1];
}

void Signal::set(int l, int k, double value) {
  if (l < 1 || l > 30 || k < 1 || k > (1 << l)) {
    throw std::out_of_range("coefficient index (" + std::to_string(l) + ", " +
                            std::to_string(k) + ") out of range");
  }
  while (max_level() < l) {
    levels_.emplace_back(std::size_t{1} << (levels_.size() + 1), 0.0);
  }
  levels_[l - 1][k - 1] = value;
}

std::span<const double> Signal::level(int l) const {
  if (l < 1 || l > max_level()) return {};
  return levels_[l - 1];
}

double Signal::squared_norm() const {
  double acc = 0.0;
  for (const auto& lv : levels_) {
    for (double v : lv) acc += v * v;
  }
  return acc;
}

std::vector<double> Signal::flatten(int L) const {
  std::vector<double> out(dimension(L), 0.0);
  std::size_t offset = 0;
  for (int l = 1; l <= L; ++l) {
    auto lv = level(l);
    std::copy(lv.begin(), lv.end(), out.begin() + offset);
    offset += std::size_t{1} << l;
  }
  return out;
}

Signal Signal::from_flat(std::span<const double> coeffs, int L) {
  if (coeffs.size() != dimension(L)) {
    throw std::invalid_argument("flat coefficient vector has wrong length");
  }
  Signal f;
  std::size_t offset = 0;
  for (int l = 1; l <= L; ++l) {
    for (int k = 1; k <= (1 << l); ++k) f.set(l, k, coeffs[offset++]);
  }
  return f;
}

Signal Signal::scaled(double c) const {
  Signal out = *this;
  for (auto& lv : out.levels_) {
    for (double& v : lv) v *= c;
  }
  return out;
}

double besov_norm(const Signal& f, double s, double p, double q) {
  double acc = 0.0;
  for (int l = 1; l <= f.max_level(); ++l) {
    double lp = 0.0;
    for (double v : f.level(l)) {
      if (std::isinf(p)) {
        lp = std::max(lp, std::abs(v));
      } else {
        lp += std::pow(std::abs(v), p);
      }
    }
    if (!std::isinf(p)) lp = std::pow(lp, 1.0 / p);
    double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
    double term = std::exp2(l * (s + 0.5 - inv_p)) * lp;
    if (std::isinf(q)) {
      acc = std::max(acc, term);
    } else {
      acc += std::pow(term, q);
    }
  }
  return std::isinf(q) ? acc : std::pow(acc, 1.0 / q);
}

Signal project(const Signal& f, int L) {
  if (L < 1) throw std::invalid_argument("projection level must be >= 1");
  Signal out;
  for (int l = 1; l <= std::min(L, f.max_level()); ++l) {
    auto lv = f.level(l);
    for (int k = 1; k <= static_cast<int>(lv.size()); ++k) {
      out.set(l, k, lv[k - 1]);
    }
  }
  return out;
}

Spread parse_spread(const std::string& name) {
  if (name == "spike") return Spread::spike;
  if (name == "uniform") return Spread::uniform;
  throw ConfigError("unknown signal spread '" + name +
                    "' (expected spike or uniform)");
}

Signal gen_signal_single_level(int L, double rho, Spread spread) {
  if (L < 1) throw std::invalid_argument("level must be >= 1");
  if (!(rho >= 0)) throw std::invalid_argument("rho must be nonnegative");
  Signal f;
  if (spread == Spread::spike) {
    f.set(L, 1, rho);
  } else {
    double v = rho * std::exp2(-0.5 * L);
    for (int k = 1; k <= (1 << L); ++k) f.set(L, k, v);
  }
  return f;
}

Signal gen_signal_prior(int L, double rho, double c_scale, std::uint64_t seed) {
  if (c_scale <= 0) throw std::invalid_argument("c_scale must be positive");
  const auto d = static_cast<double>(dimension(L));
  const double sd = std::sqrt(std::pow(c_scale, -0.5) / d) * rho;
  Engine eng = make_engine(seed, {tag(Stream::prior)});
  Signal f;
  for (int l = 1; l <= L; ++l) {
    for (int k = 1; k <= (1 << l); ++k) f.set(l, k, sd * standard_normal(eng));
  }
  return f;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("invalid " + field + ": " + why);
  };
  if (m < 1) fail("m", "must be a positive integer");
  if (n < 1) fail("n", "must be a positive integer");
  if (!(sigma > 0) || std::isinf(sigma)) fail("sigma", "must be positive");
  if (!(s > 0) || std::isinf(s)) fail("s", "must be positive");
  if (!(R > 0) || std::isinf(R)) fail("R", "must be positive");
  if (!(p >= 2)) fail("p", "must lie in [2, inf]");
  if (!(q >= 1)) fail("q", "must lie in [1, inf]");
  if (!(epsilon > 1.0 / static_cast<double>(N())) || !(epsilon <= 1)) {
    fail("epsilon", "must lie in (1/N, 1] with N = m*n");
  }
  if (!(delta >= 0) || !(delta < 1)) fail("delta", "must lie in [0, 1)");
  if (!(alpha > 0) || !(alpha < 1)) fail("alpha", "must lie in (0, 1)");
  if (!(kappa_tilde > 0) || std::isinf(kappa_tilde)) {
    fail("kappa_tilde", "must be positive");
  }
}

BlockView BlockView::truncated(int L) const {
  const auto d = static_cast<int>(dimension(L));
  if (d > dim_) {
    throw std::invalid_argument("cannot truncate a block to a finer level");
  }
  return {data_, n_, stride_, d};
}

ServerBlock sample_block(const Signal& f, double sigma, int n, int L,
                         std::uint64_t seed) {
  ServerBlock block;
  block.n = n;
  block.dim = static_cast<int>(dimension(L));
  const std::vector<double> mean = f.flatten(L);
  block.values.resize(static_cast<std::size_t>(n) * block.dim);
  Engine eng = make_engine(seed);
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < block.dim; ++c) {
      block.values[idx++] = mean[c] + sigma * standard_normal(eng);
    }
  }
  return block;
}

DistributedData sample_data(const Signal& f, const ModelConfig& cfg, int L,
                            std::uint64_t seed) {
  DistributedData data;
  data.level = L;
  data.servers.reserve(cfg.m);
  for (int j = 0; j < cfg.m; ++j) {
    data.servers.push_back(
        sample_block(f, cfg.sigma, cfg.n, L,
                     derive_seed(seed, {tag(Stream::data),
                                        static_cast<std::uint64_t>(j)})));
  }
  return data;
}

void write_signal(std::ostream& out, const Signal& f) {
  out << "levels=" << f.max_level() << '\n';
  char buf[64];
  for (int l = 1; l <= f.max_level(); ++l) {
    auto lv = f.level(l);
    for (std::size_t k = 0; k < lv.size(); ++k) {
      if (lv[k] == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%.17g", lv[k]);
      out << l << ' ' << (k + 1) << ' ' << buf << '\n';
    }
  }
}

Signal read_signal(std::istream& in) {
  std::string line;
  int levels = -1;
  Signal f;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (levels < 0) {
      if (line.rfind("levels=", 0) != 0) {
        throw ConfigError("signal file: expected 'levels=L' header");
      }
      try {
        levels = std::stoi(line.substr(7));
      } catch (const std::exception&) {
        throw ConfigError("signal file: bad levels header");
      }
      if (levels < 0) throw ConfigError("signal file: negative levels");
      continue;
    }
    std::istringstream ls(line);
    int l = 0;
    int k = 0;
    double v = 0;
    if (!(ls >> l >> k >> v)) {
      throw ConfigError("signal file: malformed line " +
                        std::to_string(lineno));
    }
    if (l < 1 || l > levels || k < 1 || k > (1 << l)) {
      throw ConfigError("signal file: index out of range on line " +
                        std::to_string(lineno));
    }
    f.set(l, k, v);
  }
  if (levels < 0) throw ConfigError("signal file: missing 'levels=L' header");
  return f;
}

}  // namespace fedpriv
