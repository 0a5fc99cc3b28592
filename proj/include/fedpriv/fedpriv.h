#ifndef FEDPRIV_H
#define FEDPRIV_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define FEDPRIV_API __declspec(dllexport)
#else
#define FEDPRIV_API __attribute__((visibility("default")))
#endif

typedef enum fedpriv_status {
  FEDPRIV_OK = 0,
  FEDPRIV_ERR_ARGUMENT = 1,
  FEDPRIV_ERR_CONFIG = 2,
  FEDPRIV_ERR_RUNTIME = 3
} fedpriv_status;

typedef struct fedpriv_config fedpriv_config;

/* Message for the most recent failure on the calling thread ("" if none). */
FEDPRIV_API const char* fedpriv_last_error(void);

FEDPRIV_API const char* fedpriv_version(void);

FEDPRIV_API fedpriv_status fedpriv_config_load(const char* path,
                                               fedpriv_config** out);
FEDPRIV_API fedpriv_status fedpriv_config_parse(const char* text,
                                                fedpriv_config** out);
/* Overrides one key and revalidates; on failure the handle is unchanged. */
FEDPRIV_API fedpriv_status fedpriv_config_set(fedpriv_config* cfg,
                                              const char* key,
                                              const char* value);
FEDPRIV_API void fedpriv_config_free(fedpriv_config* cfg);

/* Runs `command` (NULL: the config's own command) and writes its files under
   out_dir. seed_override is used only when has_seed is nonzero. */
FEDPRIV_API fedpriv_status fedpriv_run(const fedpriv_config* cfg,
                                       const char* command,
                                       const char* out_dir, int workers,
                                       int has_seed, uint64_t seed_override);

FEDPRIV_API fedpriv_status fedpriv_emit_figure2(const char* out_dir);

FEDPRIV_API fedpriv_status fedpriv_dimension(int L, size_t* out);

/* Squared separation rate (all constants 1) for the config's parameters. */
FEDPRIV_API fedpriv_status fedpriv_separation_rate(const fedpriv_config* cfg,
                                                   int shared, double* out);
FEDPRIV_API fedpriv_status fedpriv_regime(const fedpriv_config* cfg,
                                          int shared, int* regime_id);
FEDPRIV_API fedpriv_status fedpriv_optimal_resolution(
    const fedpriv_config* cfg, int shared, int* level);

#ifdef __cplusplus
}
#endif

#endif
