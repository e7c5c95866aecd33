#include "model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "util.hpp"

namespace amen::model {

using ad::TensorRef;

namespace {

constexpr double kMaskLogit = -1e30;

void fill_uniform(const TensorRef& t, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& x : t->v) x = dist(rng);
}

TensorRef dense_init(std::vector<int> shape, std::mt19937_64& rng) {
  auto t = ad::make_param(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(t->shape[0]));
  fill_uniform(t, rng, -bound, bound);
  return t;
}

TensorRef table_init(int vocab, int d, std::mt19937_64& rng) {
  auto t = ad::make_param({vocab, d});
  fill_uniform(t, rng, -0.05, 0.05);
  return t;
}

MhtaParams mhta_init(int d, int h, std::mt19937_64& rng) {
  MhtaParams p;
  for (int i = 0; i < h; ++i) {
    p.wq.push_back(dense_init({d, d / h}, rng));
    p.wk.push_back(dense_init({d, d / h}, rng));
    p.wv.push_back(dense_init({d, d / h}, rng));
  }
  return p;
}

Mlp mlp_init(int in, const std::vector<int>& hidden, std::mt19937_64& rng) {
  Mlp net;
  int prev = in;
  for (int width : hidden) {
    net.w.push_back(dense_init({prev, width}, rng));
    net.b.push_back(ad::make_param({1, width}));
    prev = width;
  }
  net.w.push_back(dense_init({prev, 1}, rng));
  net.b.push_back(ad::make_param({1, 1}));
  return net;
}

void register_mhta(ModelParams& p, const std::string& prefix, const MhtaParams& att,
                   bool rwd) {
  for (std::size_t i = 0; i < att.wq.size(); ++i) {
    p.register_tensor(prefix + ".q" + std::to_string(i), att.wq[i], rwd);
    p.register_tensor(prefix + ".k" + std::to_string(i), att.wk[i], rwd);
    p.register_tensor(prefix + ".v" + std::to_string(i), att.wv[i], rwd);
  }
}

void register_mlp(ModelParams& p, const std::string& prefix, const Mlp& net, bool rwd) {
  for (std::size_t i = 0; i < net.w.size(); ++i) {
    p.register_tensor(prefix + ".w" + std::to_string(i), net.w[i], rwd);
    p.register_tensor(prefix + ".b" + std::to_string(i), net.b[i], rwd);
  }
}

// rows of per-element embeddings stacked into an [L×d] matrix; null when empty
TensorRef stack_rows(ad::Tape& tape, const std::vector<TensorRef>& rows) {
  if (rows.empty()) return nullptr;
  if (rows.size() == 1) return rows[0];
  return tape.concat(rows, 0);
}

TensorRef embed_item_seq(ad::Tape& tape, const std::vector<data::ItemFeatures>& seq,
                         const ModelParams& p) {
  std::vector<TensorRef> rows;
  rows.reserve(seq.size());
  for (const auto& it : seq) rows.push_back(embed_item(tape, it, p));
  return stack_rows(tape, rows);
}

}  // namespace

void ModelParams::register_tensor(const std::string& name, const TensorRef& t, bool rwd) {
  named_.emplace_back(name, t);
  if (rwd) rwd_.push_back(t);
}

std::vector<TensorRef> ModelParams::all() const {
  std::vector<TensorRef> out;
  out.reserve(named_.size());
  for (const auto& [name, t] : named_) out.push_back(t);
  return out;
}

std::vector<TensorRef> ModelParams::w_rwd() const { return rwd_; }

bool ModelParams::in_w_rwd(const TensorRef& p) const {
  for (const auto& t : rwd_)
    if (t == p) return true;
  return false;
}

void ModelParams::zero_grad() const {
  for (const auto& [name, t] : named_) t->zero_grad();
}

ModelParams ModelParams::init(const data::DatasetMeta& meta, const ModelConfig& cfg,
                              std::uint64_t seed) {
  if (cfg.d % cfg.h != 0)
    throw std::invalid_argument("model config: d must be divisible by h");
  ModelParams p;
  p.cfg = cfg;
  p.meta = meta;
  std::mt19937_64 rng(mix_seed(seed, 0x6d6f64656cULL));
  const int d = cfg.d;

  p.emb_item = table_init(meta.n_items, d, rng);
  p.emb_category = table_init(meta.n_categories, d, rng);
  p.emb_shop = table_init(meta.n_shops, d, rng);
  p.emb_price = table_init(meta.n_price_buckets, d, rng);
  p.emb_user = table_init(meta.n_users, d, rng);
  p.emb_age = table_init(meta.n_age_buckets, d, rng);
  p.emb_activity = table_init(meta.n_activity_buckets, d, rng);
  p.register_tensor("emb.item", p.emb_item, false);
  p.register_tensor("emb.category", p.emb_category, false);
  p.register_tensor("emb.shop", p.emb_shop, false);
  p.register_tensor("emb.price", p.emb_price, false);
  p.register_tensor("emb.user", p.emb_user, false);
  p.register_tensor("emb.age", p.emb_age, false);
  p.register_tensor("emb.activity", p.emb_activity, false);

  p.item_att = mhta_init(d, cfg.h, rng);
  register_mhta(p, "att.item", p.item_att, false);

  const int main_in = d * (cfg.use_aiseq ? 5 : 4);
  p.main_net = mlp_init(main_in, cfg.main_hidden, rng);
  register_mlp(p, "main", p.main_net, false);

  if (cfg.use_moveline_reward) {
    p.emb_scenario = table_init(meta.n_scenarios, d, rng);
    p.emb_hour = table_init(kHourBuckets, d, rng);
    p.emb_scene_kind = table_init(data::kSceneKindCount, d, rng);
    p.emb_entity = table_init(meta.n_entities, d, rng);
    p.emb_recency = table_init(meta.recency_bucket_count(), d, rng);
    p.register_tensor("emb.scenario", p.emb_scenario, false);
    p.register_tensor("emb.hour", p.emb_hour, false);
    p.register_tensor("emb.scene_kind", p.emb_scene_kind, false);
    p.register_tensor("emb.entity", p.emb_entity, false);
    p.register_tensor("emb.recency", p.emb_recency, false);

    p.scene_att = mhta_init(d, cfg.h, rng);
    register_mhta(p, "att.scene", p.scene_att, true);
    p.prompt_proj = dense_init({3 * d, d}, rng);
    p.register_tensor("prompt.proj", p.prompt_proj, true);
    p.reward_net = mlp_init(d, cfg.reward_hidden, rng);
    register_mlp(p, "reward", p.reward_net, true);
  }
  return p;
}

int hour_bucket(std::int64_t timestamp) {
  std::int64_t h = (timestamp / 3600) % kHourBuckets;
  if (h < 0) h += kHourBuckets;
  return static_cast<int>(h);
}

TensorRef embed_item(ad::Tape& tape, const data::ItemFeatures& item, const ModelParams& p) {
  const int ids[1] = {item.item_id};
  auto e = tape.gather_sum(p.emb_item, {ids, 1});
  const int cat[1] = {item.category_id};
  e = tape.add(e, tape.gather_sum(p.emb_category, {cat, 1}));
  const int shop[1] = {item.shop_id};
  e = tape.add(e, tape.gather_sum(p.emb_shop, {shop, 1}));
  const int price[1] = {item.price_bucket};
  return tape.add(e, tape.gather_sum(p.emb_price, {price, 1}));
}

TensorRef embed_moveline_node(ad::Tape& tape, const data::MovelineNode& node,
                              const ModelParams& p) {
  const int kind[1] = {static_cast<int>(node.kind)};
  auto e = tape.gather_sum(p.emb_scene_kind, {kind, 1});
  const int cat[1] = {node.category_id};
  e = tape.add(e, tape.gather_sum(p.emb_category, {cat, 1}));
  const int ent[1] = {node.entity_id};
  e = tape.add(e, tape.gather_sum(p.emb_entity, {ent, 1}));
  const int rec[1] = {node.recency_bucket};
  return tape.add(e, tape.gather_sum(p.emb_recency, {rec, 1}));
}

TensorRef embed_user(ad::Tape& tape, const data::Impression& imp, const ModelParams& p) {
  const int uid[1] = {imp.user_id};
  auto e = tape.gather_sum(p.emb_user, {uid, 1});
  const int age[1] = {imp.age_bucket};
  e = tape.add(e, tape.gather_sum(p.emb_age, {age, 1}));
  const int act[1] = {imp.activity_bucket};
  return tape.add(e, tape.gather_sum(p.emb_activity, {act, 1}));
}

TensorRef mhta(ad::Tape& tape, const TensorRef& query, const TensorRef& seq,
               const MhtaParams& proj, int h, const std::vector<bool>* mask) {
  const int d = query->cols();
  if (!seq) return ad::make_zeros({1, d});
  const int len = seq->rows();
  int live = len;
  TensorRef mask_bias;
  if (mask) {
    if (static_cast<int>(mask->size()) != len)
      throw std::invalid_argument("mhta: mask length mismatch");
    std::vector<double> bias(len, 0.0);
    live = 0;
    for (int i = 0; i < len; ++i) {
      if ((*mask)[i])
        bias[i] = kMaskLogit;
      else
        ++live;
    }
    if (live == 0) return ad::make_zeros({1, d});
    mask_bias = ad::make_const({1, len}, std::move(bias));
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(d) / h);
  std::vector<TensorRef> heads;
  heads.reserve(h);
  for (int i = 0; i < h; ++i) {
    auto q = tape.matmul(query, proj.wq[i]);
    auto k = tape.matmul(seq, proj.wk[i]);
    auto logits = tape.affine(tape.matmul_nt(q, k), scale, 0.0);
    if (mask_bias) logits = tape.add(logits, mask_bias);
    auto attn = tape.softmax(logits, -1);
    heads.push_back(tape.matmul(attn, tape.matmul(seq, proj.wv[i])));
  }
  return tape.concat(heads, -1);
}

TensorRef build_prompt(ad::Tape& tape, const data::ItemFeatures& target, int scenario_id,
                       std::int64_t timestamp, const ModelParams& p) {
  const int sc[1] = {scenario_id};
  const int hr[1] = {hour_bucket(timestamp)};
  const TensorRef parts[3] = {embed_item(tape, target, p),
                              tape.gather_sum(p.emb_scenario, {sc, 1}),
                              tape.gather_sum(p.emb_hour, {hr, 1})};
  return tape.matmul(tape.concat(parts, -1), p.prompt_proj);
}

TensorRef mlp_apply(ad::Tape& tape, const Mlp& net, const TensorRef& x) {
  auto cur = x;
  for (std::size_t i = 0; i < net.w.size(); ++i) {
    cur = tape.add(tape.matmul(cur, net.w[i]), net.b[i]);
    if (i + 1 < net.w.size()) cur = tape.relu(cur);
  }
  return cur;
}

namespace {

// prompt + scene-level attention + Reward Net for one impression
TensorRef moveline_reward(ad::Tape& tape, const data::Impression& imp,
                          const ModelParams& p) {
  auto prompt = build_prompt(tape, imp.target, imp.scenario_id, imp.timestamp, p);
  std::vector<TensorRef> rows;
  rows.reserve(imp.moveline.nodes.size());
  for (const auto& node : imp.moveline.nodes)
    rows.push_back(embed_moveline_node(tape, node, p));
  auto g = mhta(tape, prompt, stack_rows(tape, rows), p.scene_att, p.cfg.h);
  return mlp_apply(tape, p.reward_net, g);
}

}  // namespace

ForwardOutput forward(ad::Tape& tape, const data::Impression& imp, const ModelParams& p,
                      Mode mode, const data::Impression* diff) {
  if (mode == Mode::kInference && diff != nullptr)
    throw std::logic_error("forward: diff branch supplied in inference mode");

  auto e_t = embed_item(tape, imp.target, p);
  std::vector<TensorRef> parts;
  if (p.cfg.use_aiseq)
    parts.push_back(mhta(tape, e_t, embed_item_seq(tape, imp.aiseq, p), p.item_att, p.cfg.h));
  parts.push_back(mhta(tape, e_t, embed_item_seq(tape, imp.short_seq, p), p.item_att, p.cfg.h));
  parts.push_back(mhta(tape, e_t, embed_item_seq(tape, imp.long_seq, p), p.item_att, p.cfg.h));
  parts.push_back(embed_user(tape, imp, p));
  parts.push_back(e_t);

  ForwardOutput out;
  out.y_main_t = mlp_apply(tape, p.main_net, tape.concat(parts, -1));
  if (p.cfg.use_moveline_reward) {
    out.r_t = moveline_reward(tape, imp, p);
    out.y_hat_t = tape.sigmoid(tape.add(out.y_main_t, out.r_t));
    out.r = out.r_t->v[0];
  } else {
    out.r_t = ad::make_zeros({1, 1});
    out.y_hat_t = tape.sigmoid(out.y_main_t);
    out.r = 0.0;
  }
  out.y_main = out.y_main_t->v[0];
  out.y_hat = out.y_hat_t->v[0];

  if (diff != nullptr) {
    if (!p.cfg.use_moveline_reward)
      throw std::logic_error("forward: diff branch requires the moveline reward pathway");
    out.r_diff_t = moveline_reward(tape, *diff, p);
    out.r_diff = out.r_diff_t->v[0];
  }
  return out;
}

}  // namespace amen::model
