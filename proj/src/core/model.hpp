#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "data.hpp"
#include "tensor.hpp"

namespace amen::model {

inline constexpr int kHourBuckets = 24;

struct ModelConfig {
  int d = 32;  // hidden dimension, divisible by h
  int h = 4;   // attention heads
  bool use_aiseq = true;
  bool use_moveline_reward = true;
  std::vector<int> main_hidden{64, 32};
  std::vector<int> reward_hidden{32};

  bool operator==(const ModelConfig&) const = default;
};

// One set of per-head Q/K/V projections, each [d × d/h].
struct MhtaParams {
  std::vector<ad::TensorRef> wq, wk, wv;
};

struct Mlp {
  std::vector<ad::TensorRef> w;  // [in × out]
  std::vector<ad::TensorRef> b;  // [1 × out]
};

class ModelParams {
 public:
  ModelParams() = default;
  static ModelParams init(const data::DatasetMeta& meta, const ModelConfig& cfg,
                          std::uint64_t seed);

  ModelConfig cfg;
  data::DatasetMeta meta;

  // embedding tables; the category table is shared between item features and
  // moveline nodes
  ad::TensorRef emb_item, emb_category, emb_shop, emb_price;
  ad::TensorRef emb_user, emb_age, emb_activity;
  ad::TensorRef emb_scenario, emb_hour;
  ad::TensorRef emb_scene_kind, emb_entity, emb_recency;

  MhtaParams item_att;   // shared across AISeq / short / long sequences
  MhtaParams scene_att;  // moveline pathway
  ad::TensorRef prompt_proj;  // [3d × d]
  Mlp main_net;
  Mlp reward_net;

  // deterministic creation order; names are stable across runs
  const std::vector<std::pair<std::string, ad::TensorRef>>& named() const { return named_; }
  std::vector<ad::TensorRef> all() const;
  // the W_Rwd partition: scene-level projections + prompt projection + Reward Net
  std::vector<ad::TensorRef> w_rwd() const;
  bool in_w_rwd(const ad::TensorRef& p) const;
  void zero_grad() const;

  void register_tensor(const std::string& name, const ad::TensorRef& t, bool rwd);

 private:
  std::vector<std::pair<std::string, ad::TensorRef>> named_;
  std::vector<ad::TensorRef> rwd_;
};

enum class Mode { kTrain, kInference };

struct ForwardOutput {
  double y_main = 0.0;
  double r = 0.0;
  double y_hat = 0.0;
  std::optional<double> r_diff;
  ad::TensorRef y_main_t, r_t, y_hat_t, r_diff_t;
};

int hour_bucket(std::int64_t timestamp);

ad::TensorRef embed_item(ad::Tape& tape, const data::ItemFeatures& item,
                         const ModelParams& p);
ad::TensorRef embed_moveline_node(ad::Tape& tape, const data::MovelineNode& node,
                                  const ModelParams& p);
ad::TensorRef embed_user(ad::Tape& tape, const data::Impression& imp, const ModelParams& p);

// Single-query multi-head target attention. `seq` is [L×d]; mask, when given,
// marks positions to drop (true = masked out). Empty or fully masked sequence
// yields the zero vector.
ad::TensorRef mhta(ad::Tape& tape, const ad::TensorRef& query, const ad::TensorRef& seq,
                   const MhtaParams& proj, int h, const std::vector<bool>* mask = nullptr);

ad::TensorRef build_prompt(ad::Tape& tape, const data::ItemFeatures& target,
                           int scenario_id, std::int64_t timestamp, const ModelParams& p);

ad::TensorRef mlp_apply(ad::Tape& tape, const Mlp& net, const ad::TensorRef& x);

ForwardOutput forward(ad::Tape& tape, const data::Impression& imp, const ModelParams& p,
                      Mode mode, const data::Impression* diff = nullptr);

}  // namespace amen::model
