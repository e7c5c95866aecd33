#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "data.hpp"

namespace amen::tsp {

enum class Domain { kSameScenario, kGlobal };

struct SamplingConfig {
  std::int64_t min_gap = 60;
  std::int64_t max_gap = 604800;  // 7 days
  Domain domain = Domain::kSameScenario;
  std::uint64_t rng_seed = 1;
};

struct ContrastivePair {
  std::int64_t target_index = -1;
  std::int64_t diff_index = -1;
};

struct CoverageReport {
  std::int64_t total_impressions = 0;
  std::int64_t matched_impressions = 0;
  double coverage_rate = 0.0;  // 0 when total is 0
};

// (user, scenario) -> record indices sorted by timestamp; scenario is -1 under
// the global domain
class PairIndex {
 public:
  PairIndex(const data::Dataset& ds, Domain domain);

  Domain domain() const { return domain_; }
  std::span<const std::int64_t> bucket(int user_id, int scenario_id) const;
  std::size_t bucket_count() const { return buckets_.size(); }
  std::int64_t total_entries() const { return total_; }

 private:
  Domain domain_;
  std::map<std::pair<int, int>, std::vector<std::int64_t>> buckets_;
  std::int64_t total_ = 0;
};

bool pair_valid(const data::Impression& target, const data::Impression& diff,
                const SamplingConfig& cfg);

// uniform seeded choice among all valid candidates; deterministic per
// (target_index, seed); nullopt when no candidate exists
std::optional<std::int64_t> sample_diff(const data::Dataset& ds, std::int64_t target_index,
                                        const PairIndex& index, const SamplingConfig& cfg);

std::pair<std::vector<ContrastivePair>, CoverageReport> match_batch(
    const data::Dataset& ds, std::span<const std::int64_t> batch, const PairIndex& index,
    const SamplingConfig& cfg);

// pairing pass over the whole dataset: fills diff_index in place and returns
// the coverage report
CoverageReport pair_dataset(data::Dataset& ds, const SamplingConfig& cfg);

}  // namespace amen::tsp
