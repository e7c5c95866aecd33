/* C API for the AMEN CTR library. All functions return amen_status; on
 * failure amen_last_error() carries a thread-local message. Config files are
 * flat JSON; overrides are "key=value" strings applied on top. */
#ifndef AMEN_C_H
#define AMEN_C_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum amen_status {
  AMEN_OK = 0,
  AMEN_ERR_IO = 1,
  AMEN_ERR_CONFIG = 2,
  AMEN_ERR_VALIDATION = 3,
  AMEN_ERR_CONTRACT = 4,
  AMEN_ERR_INTERNAL = 5,
} amen_status;

/* message describing the most recent failure on this thread; never NULL */
const char* amen_last_error(void);

/* synthetic moveline dataset generation; trace_out may be NULL */
amen_status amen_generate(const char* sim_config_path, const char* const* overrides,
                          int n_overrides, const char* train_out, const char* test_out,
                          const char* trace_out);

/* TSP pairing pass: annotates records with diff references and reports match
 * coverage. domain is "same_scenario" or "global"; report_out may be NULL.
 * coverage_rate_out, when non-NULL, receives matched/total. */
amen_status amen_pair(const char* dataset_in, const char* dataset_out,
                      const char* report_out, const char* domain, int64_t min_gap,
                      int64_t max_gap, uint64_t seed, double* coverage_rate_out);

amen_status amen_train(const char* config_path, const char* const* overrides,
                       int n_overrides, const char* checkpoint_out, const char* log_out);

/* runs inference-mode evaluation; report_out / dump_out may be NULL */
amen_status amen_evaluate(const char* checkpoint_path, const char* dataset_path,
                          const char* report_out, const char* dump_out,
                          double* auc_out, double* gauc_out);

amen_status amen_ablate(const char* config_path, const char* const* overrides,
                        int n_overrides, const char* table_out);

amen_status amen_analyze_reward(const char* dump_tsp, const char* dump_non_tsp,
                                const char* report_out, const char* table_out);

/* opaque model handle for direct scoring */
typedef struct amen_model amen_model;

amen_status amen_model_open(const char* checkpoint_path, amen_model** out);
void amen_model_close(amen_model* model);
uint64_t amen_model_meta_hash(const amen_model* model);

/* scores one impression record (one dataset line, without the header);
 * y_hat_out and reward_out may be NULL */
amen_status amen_model_predict_json(amen_model* model, const char* impression_json,
                                    double* y_hat_out, double* reward_out);

#ifdef __cplusplus
}
#endif

#endif /* AMEN_C_H */
