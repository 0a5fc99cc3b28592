#include "fedpriv/fedpriv.h"

#include <exception>
#include <stdexcept>
#include <string>

#include "fedpriv/cli.hpp"
#include "fedpriv/errors.hpp"
#include "fedpriv/rates.hpp"

struct fedpriv_config {
  fedpriv::RunConfig cfg;
};

namespace {

thread_local std::string last_error;

template <class Fn>
fedpriv_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return FEDPRIV_OK;
  } catch (const fedpriv::ConfigError& e) {
    last_error = e.what();
    return FEDPRIV_ERR_CONFIG;
  } catch (const std::invalid_argument& e) {
    last_error = e.what();
    return FEDPRIV_ERR_CONFIG;
  } catch (const std::exception& e) {
    last_error = e.what();
    return FEDPRIV_ERR_RUNTIME;
  } catch (...) {
    last_error = "unknown error";
    return FEDPRIV_ERR_RUNTIME;
  }
}

fedpriv_status bad_argument(const char* what) {
  last_error = what;
  return FEDPRIV_ERR_ARGUMENT;
}

}  // namespace

extern "C" {

const char* fedpriv_last_error(void) { return last_error.c_str(); }

const char* fedpriv_version(void) { return "0.1.0"; }

fedpriv_status fedpriv_config_load(const char* path, fedpriv_config** out) {
  if (!path || !out) return bad_argument("null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new fedpriv_config{fedpriv::RunConfig::load(path)};
  });
}

fedpriv_status fedpriv_config_parse(const char* text, fedpriv_config** out) {
  if (!text || !out) return bad_argument("null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new fedpriv_config{fedpriv::RunConfig::parse(text)};
  });
}

fedpriv_status fedpriv_config_set(fedpriv_config* cfg, const char* key,
                                  const char* value) {
  if (!cfg || !key || !value) return bad_argument("null argument");
  return guarded([&] {
    fedpriv::RunConfig copy = cfg->cfg;
    copy.set(key, value);
    cfg->cfg = std::move(copy);
  });
}

void fedpriv_config_free(fedpriv_config* cfg) { delete cfg; }

fedpriv_status fedpriv_run(const fedpriv_config* cfg, const char* command,
                           const char* out_dir, int workers, int has_seed,
                           uint64_t seed_override) {
  if (!cfg || !out_dir) return bad_argument("null argument");
  return guarded([&] {
    fedpriv::RunOptions opt;
    if (command) opt.command = command;
    opt.out_dir = out_dir;
    opt.workers = workers;
    if (has_seed) opt.seed = seed_override;
    fedpriv::run_command(cfg->cfg, opt);
  });
}

fedpriv_status fedpriv_emit_figure2(const char* out_dir) {
  if (!out_dir) return bad_argument("null argument");
  return guarded([&] { fedpriv::emit_figure2_bundle(out_dir); });
}

fedpriv_status fedpriv_dimension(int L, size_t* out) {
  if (!out) return bad_argument("null argument");
  return guarded([&] { *out = fedpriv::dimension(L); });
}

fedpriv_status fedpriv_separation_rate(const fedpriv_config* cfg, int shared,
                                       double* out) {
  if (!cfg || !out) return bad_argument("null argument");
  return guarded(
      [&] { *out = fedpriv::separation_rate(cfg->cfg.model(), shared != 0); });
}

fedpriv_status fedpriv_regime(const fedpriv_config* cfg, int shared,
                              int* regime_id) {
  if (!cfg || !regime_id) return bad_argument("null argument");
  return guarded([&] {
    *regime_id = fedpriv::classify_regime(cfg->cfg.model(), shared != 0).regime_id;
  });
}

fedpriv_status fedpriv_optimal_resolution(const fedpriv_config* cfg,
                                          int shared, int* level) {
  if (!cfg || !level) return bad_argument("null argument");
  return guarded([&] {
    *level = fedpriv::optimal_resolution(cfg->cfg.model(), shared != 0);
  });
}

}  // extern "C"
