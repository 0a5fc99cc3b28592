#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace fedpriv {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Number of coefficients in levels 1..L, i.e. 2^{L+1} - 2.
std::size_t dimension(int L);

// Wavelet-indexed coefficient sequence. Level l holds 2^l entries addressed by
// k = 1..2^l; levels above max_level() are zero.
class Signal {
 public:
  Signal() = default;

  double coeff(int l, int k) const;
  void set(int l, int k, double value);

  int max_level() const { return static_cast<int>(levels_.size()); }
  std::span<const double> level(int l) const;
  double squared_norm() const;

  // Coefficients of levels 1..L in level-major order (length dimension(L)).
  std::vector<double> flatten(int L) const;
  static Signal from_flat(std::span<const double> coeffs, int L);

  Signal scaled(double c) const;
  bool operator==(const Signal&) const = default;

 private:
  std::vector<std::vector<double>> levels_;
};

// Sequence-space Besov norm; p or q equal to kInf selects the sup forms.
double besov_norm(const Signal& f, double s, double p, double q);

Signal project(const Signal& f, int L);

enum class Spread { spike, uniform };

Spread parse_spread(const std::string& name);

Signal gen_signal_single_level(int L, double rho, Spread spread);

// Centered Gaussian coefficients on levels 1..L with variance
// c_scale^{-1/2} * rho^2 / d_L each.
Signal gen_signal_prior(int L, double rho, double c_scale, std::uint64_t seed);

struct ModelConfig {
  int m = 0;
  int n = 0;
  double sigma = 0;
  double s = 0;
  double R = 1;
  double p = 2;
  double q = 2;
  double epsilon = 0;
  double delta = 0;
  double alpha = 0;
  double kappa_tilde = 1;

  long long N() const { return static_cast<long long>(m) * n; }
  // Throws ConfigError naming the first offending field.
  void validate() const;
};

// Read-only view of n observation vectors of length dim() stored row-major
// with a given stride; used to truncate to coarser levels without copying.
class BlockView {
 public:
  BlockView(const double* data, int n, int stride, int dim)
      : data_(data), n_(n), stride_(stride), dim_(dim) {}

  int size() const { return n_; }
  int dim() const { return dim_; }
  std::span<const double> row(int i) const {
    return {data_ + static_cast<std::ptrdiff_t>(i) * stride_,
            static_cast<std::size_t>(dim_)};
  }
  // Same observations restricted to levels 1..L.
  BlockView truncated(int L) const;

 private:
  const double* data_;
  int n_;
  int stride_;
  int dim_;
};

struct ServerBlock {
  int n = 0;
  int dim = 0;
  std::vector<double> values;

  BlockView view() const { return {values.data(), n, dim, dim}; }
  BlockView view(int L) const { return view().truncated(L); }
};

struct DistributedData {
  int level = 0;
  std::vector<ServerBlock> servers;
};

ServerBlock sample_block(const Signal& f, double sigma, int n, int L,
                         std::uint64_t seed);

// Server j draws from the substream derive_seed(seed, {data, j}).
DistributedData sample_data(const Signal& f, const ModelConfig& cfg, int L,
                            std::uint64_t seed);

// Text format: a "levels=L" header followed by "l k value" lines.
void write_signal(std::ostream& out, const Signal& f);
Signal read_signal(std::istream& in);

}  // namespace fedpriv
