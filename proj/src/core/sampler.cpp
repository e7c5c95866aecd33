#include "sampler.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "util.hpp"

namespace amen::tsp {

PairIndex::PairIndex(const data::Dataset& ds, Domain domain) : domain_(domain) {
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(ds.impressions.size()); ++i) {
    const auto& imp = ds.impressions[i];
    const int scen = domain == Domain::kSameScenario ? imp.scenario_id : -1;
    buckets_[{imp.user_id, scen}].push_back(i);
    ++total_;
  }
  for (auto& [key, vec] : buckets_) {
    std::stable_sort(vec.begin(), vec.end(), [&ds](std::int64_t a, std::int64_t b) {
      return ds.impressions[a].timestamp < ds.impressions[b].timestamp;
    });
  }
}

std::span<const std::int64_t> PairIndex::bucket(int user_id, int scenario_id) const {
  const int scen = domain_ == Domain::kSameScenario ? scenario_id : -1;
  auto it = buckets_.find({user_id, scen});
  if (it == buckets_.end()) return {};
  return it->second;
}

bool pair_valid(const data::Impression& target, const data::Impression& diff,
                const SamplingConfig& cfg) {
  if (target.user_id != diff.user_id) return false;
  if (target.label == diff.label) return false;
  const std::int64_t gap = std::abs(target.timestamp - diff.timestamp);
  if (gap < cfg.min_gap || gap > cfg.max_gap) return false;
  if (cfg.domain == Domain::kSameScenario && target.scenario_id != diff.scenario_id)
    return false;
  return true;
}

std::optional<std::int64_t> sample_diff(const data::Dataset& ds, std::int64_t target_index,
                                        const PairIndex& index, const SamplingConfig& cfg) {
  if (cfg.min_gap <= 0 || cfg.min_gap >= cfg.max_gap)
    throw std::invalid_argument("sampling config: need 0 < min_gap < max_gap");
  const auto& target = ds.impressions.at(target_index);
  std::vector<std::int64_t> candidates;
  for (std::int64_t i : index.bucket(target.user_id, target.scenario_id)) {
    if (i == target_index) continue;
    if (pair_valid(target, ds.impressions[i], cfg)) candidates.push_back(i);
  }
  if (candidates.empty()) return std::nullopt;
  std::mt19937_64 rng(mix_seed(cfg.rng_seed, static_cast<std::uint64_t>(target_index)));
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  return candidates[pick(rng)];
}

std::pair<std::vector<ContrastivePair>, CoverageReport> match_batch(
    const data::Dataset& ds, std::span<const std::int64_t> batch, const PairIndex& index,
    const SamplingConfig& cfg) {
  std::vector<ContrastivePair> pairs;
  CoverageReport report;
  report.total_impressions = static_cast<std::int64_t>(batch.size());
  for (std::int64_t idx : batch) {
    if (auto diff = sample_diff(ds, idx, index, cfg)) {
      pairs.push_back({idx, *diff});
      ++report.matched_impressions;
    }
  }
  report.coverage_rate =
      report.total_impressions == 0
          ? 0.0
          : static_cast<double>(report.matched_impressions) / report.total_impressions;
  return {std::move(pairs), report};
}

CoverageReport pair_dataset(data::Dataset& ds, const SamplingConfig& cfg) {
  PairIndex index(ds, cfg.domain);
  std::vector<std::int64_t> all(ds.impressions.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::int64_t>(i);
  auto [pairs, report] = match_batch(ds, all, index, cfg);
  for (auto& imp : ds.impressions) imp.diff_index.reset();
  for (const auto& p : pairs) ds.impressions[p.target_index].diff_index = p.diff_index;
  return report;
}

}  // namespace amen::tsp
