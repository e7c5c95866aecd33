#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>

namespace amen::metrics {

double auc(std::span<const EvalRecord> records) {
  const std::int64_t n = static_cast<std::int64_t>(records.size());
  std::int64_t pos = 0;
  for (const auto& r : records) pos += r.label;
  const std::int64_t neg = n - pos;
  if (pos == 0 || neg == 0)
    throw MetricError("auc: undefined on single-class input");

  std::vector<std::int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&records](std::int64_t a, std::int64_t b) {
    return records[a].y_hat < records[b].y_hat;
  });

  // doubled average ranks keep everything in integers, so the rank-sum result
  // matches brute-force pair counting exactly
  std::int64_t rank2_pos_sum = 0;
  std::int64_t i = 0;
  while (i < n) {
    std::int64_t j = i;
    while (j + 1 < n && records[order[j + 1]].y_hat == records[order[i]].y_hat) ++j;
    const std::int64_t rank2 = (i + 1) + (j + 1);  // 2 * average 1-based rank
    for (std::int64_t k = i; k <= j; ++k)
      if (records[order[k]].label == 1) rank2_pos_sum += rank2;
    i = j + 1;
  }
  const std::int64_t u2 = rank2_pos_sum - pos * (pos + 1);  // 2 * U statistic
  return static_cast<double>(u2) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

double gauc(std::span<const EvalRecord> records) {
  std::map<int, std::vector<EvalRecord>> by_user;
  for (const auto& r : records) by_user[r.user_id].push_back(r);
  double weighted = 0.0;
  double weight = 0.0;
  for (const auto& [user, recs] : by_user) {
    std::int64_t pos = 0;
    for (const auto& r : recs) pos += r.label;
    if (pos == 0 || pos == static_cast<std::int64_t>(recs.size())) continue;
    weighted += static_cast<double>(recs.size()) * auc(recs);
    weight += static_cast<double>(recs.size());
  }
  if (weight == 0.0)
    throw MetricError("gauc: no user carries both labels");
  return weighted / weight;
}

namespace {

struct ModelBuckets {
  RewardCurve click, unclick;
  bool degenerate = false;
  int occupied_union = 0;
};

ModelBuckets bucketize(std::span<const EvalRecord> records) {
  if (records.empty()) throw MetricError("reward_distribution: empty record set");
  double lo = records[0].reward, hi = records[0].reward;
  for (const auto& r : records) {
    lo = std::min(lo, r.reward);
    hi = std::max(hi, r.reward);
  }
  ModelBuckets out;
  out.click.proportions.assign(kRewardBuckets, 0.0);
  out.unclick.proportions.assign(kRewardBuckets, 0.0);
  out.degenerate = hi == lo;
  std::int64_t n_click = 0, n_unclick = 0;
  for (const auto& r : records) {
    int b = 0;
    if (!out.degenerate) {
      b = static_cast<int>((r.reward - lo) / (hi - lo) * kRewardBuckets);
      b = std::clamp(b, 0, kRewardBuckets - 1);
    }
    if (r.label == 1) {
      out.click.proportions[b] += 1.0;
      ++n_click;
    } else {
      out.unclick.proportions[b] += 1.0;
      ++n_unclick;
    }
  }
  auto finish = [](RewardCurve& c, std::int64_t n) {
    if (n == 0) return;
    for (int b = 0; b < kRewardBuckets; ++b) {
      c.proportions[b] /= static_cast<double>(n);
      c.mean_bucket += b * c.proportions[b];
      if (c.proportions[b] > 0.0) ++c.occupied;
    }
  };
  finish(out.click, n_click);
  finish(out.unclick, n_unclick);
  for (int b = 0; b < kRewardBuckets; ++b)
    if (out.click.proportions[b] > 0.0 || out.unclick.proportions[b] > 0.0)
      ++out.occupied_union;
  return out;
}

}  // namespace

RewardDistribution reward_distribution(std::span<const EvalRecord> records_a,
                                       std::span<const EvalRecord> records_b) {
  RewardDistribution out;
  auto a = bucketize(records_a);
  auto b = bucketize(records_b);
  out.a_click = std::move(a.click);
  out.a_unclick = std::move(a.unclick);
  out.b_click = std::move(b.click);
  out.b_unclick = std::move(b.unclick);
  out.degenerate_a = a.degenerate;
  out.degenerate_b = b.degenerate;
  out.occupied_a = a.occupied_union;
  out.occupied_b = b.occupied_union;
  return out;
}

}  // namespace amen::metrics
