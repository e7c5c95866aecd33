#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

namespace amen::metrics {

struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvalRecord {
  int user_id = 0;
  double y_hat = 0.0;
  double reward = 0.0;
  int label = 0;
};

// rank-sum AUC with average ranks for ties; throws MetricError on single-class
// input
double auc(std::span<const EvalRecord> records);

// impression-count-weighted mean of per-user AUC over users with both labels
double gauc(std::span<const EvalRecord> records);

inline constexpr int kRewardBuckets = 100;

struct RewardCurve {
  std::vector<double> proportions;  // kRewardBuckets entries, summing to 1
  double mean_bucket = 0.0;         // expected bucket index under proportions
  int occupied = 0;
};

// curves for two models (a, b), each split by label; rewards min-max
// normalized within each model's record set
struct RewardDistribution {
  RewardCurve a_click, a_unclick, b_click, b_unclick;
  bool degenerate_a = false;  // zero reward variance, all mass in one bucket
  bool degenerate_b = false;
  int occupied_a = 0;  // buckets occupied by either of model a's curves
  int occupied_b = 0;
};

RewardDistribution reward_distribution(std::span<const EvalRecord> records_a,
                                       std::span<const EvalRecord> records_b);

}  // namespace amen::metrics
