#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace amen::data {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SceneKind : int {
  kSearchResult = 0,
  kShopVisit = 1,
  kCouponCollect = 2,
  kChannelVisit = 3,
  kHomepageFeed = 4,
  kTopicSearch = 5,
};
inline constexpr int kSceneKindCount = 6;

struct ItemFeatures {
  int item_id = 0;
  int category_id = 0;
  int shop_id = 0;
  int price_bucket = 0;

  bool operator==(const ItemFeatures&) const = default;
};

struct MovelineNode {
  SceneKind kind = SceneKind::kSearchResult;
  std::int64_t timestamp = 0;
  int category_id = 0;  // dominant category of the scene, 0 = none
  int entity_id = 0;    // query/shop/coupon/channel id, 0 = none
  int recency_bucket = 0;

  bool operator==(const MovelineNode&) const = default;
};

struct Moveline {
  std::vector<MovelineNode> nodes;  // timestamps non-decreasing

  bool operator==(const Moveline&) const = default;
};

struct Impression {
  int user_id = 0;
  int age_bucket = 0;
  int activity_bucket = 0;
  int scenario_id = 0;
  std::int64_t timestamp = 0;
  ItemFeatures target;
  int label = 0;
  Moveline moveline;
  std::vector<ItemFeatures> aiseq;
  std::vector<ItemFeatures> short_seq;
  std::vector<ItemFeatures> long_seq;
  // record index of the TSP diff impression, set by the pairing pass
  std::optional<std::int64_t> diff_index;

  bool operator==(const Impression&) const = default;
};

struct DatasetMeta {
  int n_users = 0;
  int n_items = 0;
  int n_categories = 0;
  int n_shops = 0;
  int n_price_buckets = 0;
  int n_age_buckets = 0;
  int n_activity_buckets = 0;
  int n_scenarios = 0;
  int n_entities = 0;
  int moveline_cap = 30;
  int aiseq_cap = 20;
  int short_cap = 10;
  int long_cap = 50;
  // upper bounds of the finite recency buckets; one extra bucket catches the rest
  std::vector<std::int64_t> recency_bounds{60, 600, 3600, 21600, 86400, 604800};
  std::uint64_t generation_seed = 0;

  int recency_bucket_count() const { return static_cast<int>(recency_bounds.size()) + 1; }
  bool operator==(const DatasetMeta&) const = default;
};

struct Dataset {
  DatasetMeta meta;
  std::vector<Impression> impressions;
};

int recency_bucket(std::int64_t age_seconds, const std::vector<std::int64_t>& bounds);

// throws ValidationError naming the offending field; line is used in messages
void validate_impression(const Impression& imp, const DatasetMeta& meta, std::int64_t line);

std::string meta_to_json(const DatasetMeta& meta);
std::uint64_t meta_hash(const DatasetMeta& meta);

// parses and validates one record line; line_no is used in error messages
Impression impression_from_line(const std::string& line, const DatasetMeta& meta,
                                std::int64_t line_no);

Dataset read_dataset(const std::string& path);
void write_dataset(const Dataset& ds, const std::string& path);

}  // namespace amen::data
