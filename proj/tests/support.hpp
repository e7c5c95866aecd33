// shared fixtures for the unit and acceptance suites
#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "core/data.hpp"
#include "core/model.hpp"
#include "core/simulator.hpp"

namespace amen::testing {

inline data::DatasetMeta tiny_meta() {
  data::DatasetMeta m;
  m.n_users = 8;
  m.n_items = 12;
  m.n_categories = 4;
  m.n_shops = 5;
  m.n_price_buckets = 3;
  m.n_age_buckets = 3;
  m.n_activity_buckets = 2;
  m.n_scenarios = 3;
  m.n_entities = 16;
  return m;
}

inline model::ModelConfig tiny_model_config() {
  model::ModelConfig c;
  c.d = 4;
  c.h = 2;
  c.main_hidden = {6};
  c.reward_hidden = {5};
  return c;
}

inline data::ItemFeatures random_item(const data::DatasetMeta& m, std::mt19937_64& rng) {
  auto pick = [&rng](int n) {
    return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng));
  };
  return {pick(m.n_items), pick(m.n_categories), pick(m.n_shops), pick(m.n_price_buckets)};
}

// valid random impression with every sequence length <= max_len
inline data::Impression random_impression(const data::DatasetMeta& m, std::mt19937_64& rng,
                                          int max_len = 3) {
  auto pick = [&rng](int n) {
    return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng));
  };
  data::Impression imp;
  imp.user_id = pick(m.n_users);
  imp.age_bucket = pick(m.n_age_buckets);
  imp.activity_bucket = pick(m.n_activity_buckets);
  imp.scenario_id = pick(m.n_scenarios);
  imp.timestamp = 1000000 + pick(1000000);
  imp.target = random_item(m, rng);
  imp.label = pick(2);
  const int n_nodes = pick(max_len + 1);
  std::vector<std::int64_t> node_times;
  for (int i = 0; i < n_nodes; ++i)
    node_times.push_back(imp.timestamp - 1 - pick(500000));
  std::sort(node_times.begin(), node_times.end());
  for (std::int64_t t : node_times) {
    data::MovelineNode node;
    node.kind = static_cast<data::SceneKind>(pick(data::kSceneKindCount));
    node.timestamp = t;
    node.category_id = pick(m.n_categories);
    node.entity_id = pick(m.n_entities);
    node.recency_bucket = data::recency_bucket(imp.timestamp - t, m.recency_bounds);
    imp.moveline.nodes.push_back(node);
  }
  for (int i = 0, n = pick(max_len + 1); i < n; ++i) imp.aiseq.push_back(random_item(m, rng));
  for (int i = 0, n = pick(max_len + 1); i < n; ++i)
    imp.short_seq.push_back(random_item(m, rng));
  for (int i = 0, n = pick(max_len + 1); i < n; ++i)
    imp.long_seq.push_back(random_item(m, rng));
  return imp;
}

// small but structured simulated world; fast enough for unit tests
inline sim::SimConfig small_sim_config(std::uint64_t seed = 7) {
  sim::SimConfig c;
  c.n_users = 120;
  c.n_items = 400;
  c.n_categories = 20;
  c.n_shops = 40;
  c.seed = seed;
  return c;
}

}  // namespace amen::testing
