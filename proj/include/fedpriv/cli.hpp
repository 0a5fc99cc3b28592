#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedpriv/sequence_model.hpp"

namespace fedpriv {

// Parsed run configuration. Values are kept verbatim (as text) so the JSON
// sidecar replays exactly what was given; typed access validates on use.
class RunConfig {
 public:
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);

  const std::map<std::string, std::string>& values() const { return values_; }
  const ModelConfig& model() const { return model_; }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string text(const std::string& key) const;
  std::string text_or(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  long long integer(const std::string& key) const;
  long long integer_or(const std::string& key, long long fallback) const;
  bool flag_or(const std::string& key, bool fallback) const;
  std::vector<double> list(const std::string& key) const;

  void set(const std::string& key, const std::string& value);

 private:
  void finalize();

  std::map<std::string, std::string> values_;
  ModelConfig model_;
};

struct RunOptions {
  std::string command;
  std::string out_dir = ".";
  int workers = 1;
  std::optional<std::uint64_t> seed;
};

const std::vector<std::string>& command_names();

// Runs one command and returns the files written. Throws ConfigError or
// RuntimeError.
std::vector<std::string> run_command(const RunConfig& cfg,
                                     const RunOptions& options);

// Exit-code wrapper: 0 success, 2 configuration error, 3 runtime error. The
// diagnostic for a nonzero code is stored in *error when given.
int run(const std::string& config_path, const RunOptions& options,
        std::string* error = nullptr);

// Sixteen rate curves ({(5,5), (2,15)} x s in {1/5, 1/2, 1, 3} x {local,
// shared}) plus a gnuplot script.
std::vector<std::string> emit_figure2_bundle(const std::string& out_dir);

}  // namespace fedpriv
