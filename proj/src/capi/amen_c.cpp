#include "amen/amen_c.h"

#include <exception>
#include <string>
#include <vector>

#include "../core/data.hpp"
#include "../core/harness.hpp"
#include "../core/metrics.hpp"
#include "../core/model.hpp"
#include "../core/sampler.hpp"

namespace {

thread_local std::string g_last_error = "ok";

std::vector<std::string> collect(const char* const* overrides, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.emplace_back(overrides[i]);
  return out;
}

template <typename Fn>
amen_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error = "ok";
    return AMEN_OK;
  } catch (const amen::harness::ConfigError& e) {
    g_last_error = e.what();
    return AMEN_ERR_CONFIG;
  } catch (const amen::data::ValidationError& e) {
    g_last_error = e.what();
    return AMEN_ERR_VALIDATION;
  } catch (const amen::metrics::MetricError& e) {
    g_last_error = e.what();
    return AMEN_ERR_VALIDATION;
  } catch (const std::logic_error& e) {
    g_last_error = e.what();
    return AMEN_ERR_CONTRACT;
  } catch (const std::runtime_error& e) {
    g_last_error = e.what();
    return AMEN_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return AMEN_ERR_INTERNAL;
  }
}

amen_status require(const void* p, const char* what) {
  if (p) return AMEN_OK;
  g_last_error = std::string("null argument: ") + what;
  return AMEN_ERR_CONTRACT;
}

}  // namespace

struct amen_model {
  amen::model::ModelParams params;
};

extern "C" {

const char* amen_last_error(void) { return g_last_error.c_str(); }

amen_status amen_generate(const char* sim_config_path, const char* const* overrides,
                          int n_overrides, const char* train_out, const char* test_out,
                          const char* trace_out) {
  if (auto s = require(sim_config_path, "sim_config_path"); s != AMEN_OK) return s;
  if (auto s = require(train_out, "train_out"); s != AMEN_OK) return s;
  if (auto s = require(test_out, "test_out"); s != AMEN_OK) return s;
  return guarded([&] {
    auto cfg = amen::harness::load_sim_config(sim_config_path,
                                              collect(overrides, n_overrides));
    amen::harness::run_generate(cfg, train_out, test_out, trace_out ? trace_out : "");
  });
}

amen_status amen_pair(const char* dataset_in, const char* dataset_out,
                      const char* report_out, const char* domain, int64_t min_gap,
                      int64_t max_gap, uint64_t seed, double* coverage_rate_out) {
  if (auto s = require(dataset_in, "dataset_in"); s != AMEN_OK) return s;
  if (auto s = require(dataset_out, "dataset_out"); s != AMEN_OK) return s;
  if (auto s = require(domain, "domain"); s != AMEN_OK) return s;
  return guarded([&] {
    amen::tsp::SamplingConfig cfg;
    cfg.min_gap = min_gap;
    cfg.max_gap = max_gap;
    cfg.rng_seed = seed;
    const std::string d = domain;
    if (d == "same_scenario")
      cfg.domain = amen::tsp::Domain::kSameScenario;
    else if (d == "global")
      cfg.domain = amen::tsp::Domain::kGlobal;
    else
      throw amen::harness::ConfigError("domain must be same_scenario or global");
    auto report = amen::harness::run_pair(dataset_in, dataset_out,
                                          report_out ? report_out : "", cfg);
    if (coverage_rate_out) *coverage_rate_out = report.coverage_rate;
  });
}

amen_status amen_train(const char* config_path, const char* const* overrides,
                       int n_overrides, const char* checkpoint_out, const char* log_out) {
  if (auto s = require(config_path, "config_path"); s != AMEN_OK) return s;
  if (auto s = require(checkpoint_out, "checkpoint_out"); s != AMEN_OK) return s;
  return guarded([&] {
    auto cfg = amen::harness::load_experiment_config(config_path,
                                                     collect(overrides, n_overrides));
    amen::harness::run_train(cfg, checkpoint_out, log_out ? log_out : "");
  });
}

amen_status amen_evaluate(const char* checkpoint_path, const char* dataset_path,
                          const char* report_out, const char* dump_out, double* auc_out,
                          double* gauc_out) {
  if (auto s = require(checkpoint_path, "checkpoint_path"); s != AMEN_OK) return s;
  if (auto s = require(dataset_path, "dataset_path"); s != AMEN_OK) return s;
  return guarded([&] {
    auto report = amen::harness::run_evaluate(checkpoint_path, dataset_path,
                                              report_out ? report_out : "",
                                              dump_out ? dump_out : "");
    if (auc_out) *auc_out = report.auc;
    if (gauc_out) *gauc_out = report.gauc;
  });
}

amen_status amen_ablate(const char* config_path, const char* const* overrides,
                        int n_overrides, const char* table_out) {
  if (auto s = require(config_path, "config_path"); s != AMEN_OK) return s;
  if (auto s = require(table_out, "table_out"); s != AMEN_OK) return s;
  return guarded([&] {
    auto cfg = amen::harness::load_experiment_config(config_path,
                                                     collect(overrides, n_overrides));
    amen::harness::run_ablate(cfg, table_out);
  });
}

amen_status amen_analyze_reward(const char* dump_tsp, const char* dump_non_tsp,
                                const char* report_out, const char* table_out) {
  if (auto s = require(dump_tsp, "dump_tsp"); s != AMEN_OK) return s;
  if (auto s = require(dump_non_tsp, "dump_non_tsp"); s != AMEN_OK) return s;
  if (auto s = require(report_out, "report_out"); s != AMEN_OK) return s;
  return guarded([&] {
    amen::harness::run_analyze_reward(dump_tsp, dump_non_tsp, report_out,
                                      table_out ? table_out : "");
  });
}

amen_status amen_model_open(const char* checkpoint_path, amen_model** out) {
  if (auto s = require(checkpoint_path, "checkpoint_path"); s != AMEN_OK) return s;
  if (auto s = require(out, "out"); s != AMEN_OK) return s;
  return guarded([&] {
    auto* m = new amen_model{amen::harness::load_checkpoint(checkpoint_path)};
    *out = m;
  });
}

void amen_model_close(amen_model* model) { delete model; }

uint64_t amen_model_meta_hash(const amen_model* model) {
  return model ? amen::data::meta_hash(model->params.meta) : 0;
}

amen_status amen_model_predict_json(amen_model* model, const char* impression_json,
                                    double* y_hat_out, double* reward_out) {
  if (auto s = require(model, "model"); s != AMEN_OK) return s;
  if (auto s = require(impression_json, "impression_json"); s != AMEN_OK) return s;
  return guarded([&] {
    auto imp = amen::data::impression_from_line(impression_json, model->params.meta, 1);
    amen::ad::Tape tape(false);
    auto fwd = amen::model::forward(tape, imp, model->params,
                                    amen::model::Mode::kInference);
    if (y_hat_out) *y_hat_out = fwd.y_hat;
    if (reward_out) *reward_out = fwd.r;
  });
}

}  // extern "C"
