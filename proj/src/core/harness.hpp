#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "data.hpp"
#include "losses.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "sampler.hpp"
#include "simulator.hpp"

namespace amen::harness {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string train_path;
  std::string test_path;
  int d = 32;
  int h = 4;
  bool use_aiseq = true;
  bool use_tsp = true;
  bool use_moveline_reward = true;
  tsp::Domain domain_constraint = tsp::Domain::kSameScenario;
  double lr = 0.001;
  double eps = 1e-8;
  double lr_decay = 1.0;
  int batch_size = 1024;
  int epochs = 2;
  double w1 = 1.0;
  double w2 = 0.1;
  std::int64_t min_gap = 60;
  std::int64_t max_gap = 604800;
  std::uint64_t init_seed = 1;
  std::uint64_t shuffle_seed = 1;
  std::uint64_t pair_seed = 1;
  int ablation_seeds = 5;
  std::vector<double> w2_sweep{0.02, 0.1, 0.5};

  model::ModelConfig model_config() const;
  void validate() const;  // throws ConfigError; use_tsp requires use_moveline_reward
};

// flat JSON file plus "key=value" overrides (CLI flags win over file values)
ExperimentConfig load_experiment_config(const std::string& path,
                                        const std::vector<std::string>& overrides);
sim::SimConfig load_sim_config(const std::string& path,
                               const std::vector<std::string>& overrides);

struct BatchLogEntry {
  int epoch = 0;
  int batch = 0;
  loss::BatchLoss loss;
};

struct TrainOutput {
  model::ModelParams params;
  std::vector<BatchLogEntry> log;
};

struct EvalReport {
  double auc = 0.0;
  double gauc = 0.0;
  std::int64_t n = 0;
  std::int64_t positives = 0;
};

TrainOutput train_in_memory(const data::Dataset& train, const ExperimentConfig& cfg);
std::pair<std::vector<metrics::EvalRecord>, EvalReport> evaluate_in_memory(
    const model::ModelParams& params, const data::Dataset& ds);

void save_checkpoint(const model::ModelParams& params, const std::string& path);
model::ModelParams load_checkpoint(const std::string& path);

// file-level pipeline entry points backing the CLI

void run_generate(const sim::SimConfig& cfg, const std::string& train_out,
                  const std::string& test_out, const std::string& trace_out);
tsp::CoverageReport run_pair(const std::string& dataset_in, const std::string& dataset_out,
                             const std::string& report_out, const tsp::SamplingConfig& cfg);
void run_train(const ExperimentConfig& cfg, const std::string& checkpoint_out,
               const std::string& log_out);
EvalReport run_evaluate(const std::string& checkpoint_path, const std::string& dataset_path,
                        const std::string& report_out, const std::string& dump_out);
void run_ablate(const ExperimentConfig& base, const std::string& table_out);
void run_analyze_reward(const std::string& dump_a, const std::string& dump_b,
                        const std::string& report_out, const std::string& table_out);

std::vector<metrics::EvalRecord> read_dump(const std::string& path);

}  // namespace amen::harness
