#ifndef TGODE_H
#define TGODE_H

/* C interface to the temporal-graph diffusion recommender library.
 *
 * All entry points return a tgode_status; on failure tgode_last_error()
 * holds a thread-local message. Strings returned through out-parameters are
 * heap-allocated and must be released with tgode_string_free().
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  TGODE_OK = 0,
  TGODE_ERR_USAGE = 2,   /* bad config, unknown key, unreadable file */
  TGODE_ERR_DATA = 3,    /* data/model mismatch, unparsable data, unknown user */
  TGODE_ERR_NUMERIC = 4  /* non-finite loss or state */
} tgode_status;

typedef struct tgode_config tgode_config;

/* Configuration handle: key = value pairs matching the config-file keys. */
tgode_config* tgode_config_create(void);
void tgode_config_free(tgode_config* cfg);
tgode_status tgode_config_load_file(tgode_config* cfg, const char* path);
tgode_status tgode_config_set(tgode_config* cfg, const char* key, const char* value);

/* Interval and emergence analyses; writes analysis.json, intervals.csv and
 * emergence.csv into the config's out_dir. When json_out is non-NULL it
 * receives the combined JSON report. */
tgode_status tgode_analyze(const tgode_config* cfg, char** json_out);

/* Full training run; writes model.tgode and train_report.jsonl into out_dir.
 * When checkpoint_path_out is non-NULL it receives the checkpoint path. */
tgode_status tgode_train(const tgode_config* cfg, char** checkpoint_path_out);

/* Ranking metrics for "valid" or "test"; json_out receives the report. */
tgode_status tgode_evaluate(const tgode_config* cfg, const char* checkpoint_path,
                            const char* split, char** json_out);

/* Top-k recommendation for a user id at a raw timestamp; json_out receives a
 * JSON array of {"item", "score"} objects sorted by descending score. */
tgode_status tgode_recommend(const tgode_config* cfg, const char* checkpoint_path,
                             const char* user_id, int64_t time, int k, char** json_out);

/* Thread-local message for the most recent failure; empty string when none. */
const char* tgode_last_error(void);

void tgode_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* TGODE_H */
