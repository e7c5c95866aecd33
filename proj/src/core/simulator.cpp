#include "simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "util.hpp"

namespace amen::sim {

using data::Impression;
using data::ItemFeatures;
using data::MovelineNode;
using data::SceneKind;

namespace {

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

ItemFeatures make_item(int item_id, const SimConfig& cfg) {
  return {item_id, item_id % cfg.n_categories, item_id % cfg.n_shops,
          static_cast<int>(mix_seed(0x70726963ULL, item_id) % cfg.n_price_buckets)};
}

int draw_item_in_category(int category, const SimConfig& cfg, std::mt19937_64& rng) {
  const int per_cat = cfg.n_items / cfg.n_categories;
  std::uniform_int_distribution<int> pick(0, per_cat - 1);
  return category + cfg.n_categories * pick(rng);
}

SceneKind draw_scene_kind(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double u = u01(rng);
  if (u < 0.25) return SceneKind::kSearchResult;
  if (u < 0.45) return SceneKind::kShopVisit;
  if (u < 0.65) return SceneKind::kCouponCollect;
  if (u < 0.85) return SceneKind::kHomepageFeed;
  return SceneKind::kTopicSearch;
}

struct RawNode {
  SceneKind kind;
  std::int64_t timestamp;
  int category_id;
  int entity_id;
};

template <typename T>
std::vector<T> tail(const std::vector<T>& v, int cap) {
  const int n = static_cast<int>(v.size());
  const int start = std::max(0, n - cap);
  return std::vector<T>(v.begin() + start, v.end());
}

data::DatasetMeta make_meta(const SimConfig& cfg) {
  data::DatasetMeta m;
  m.n_users = cfg.n_users;
  m.n_items = cfg.n_items;
  m.n_categories = cfg.n_categories;
  m.n_shops = cfg.n_shops;
  m.n_price_buckets = cfg.n_price_buckets;
  m.n_age_buckets = cfg.n_age_buckets;
  m.n_activity_buckets = cfg.n_activity_buckets;
  m.n_scenarios = cfg.n_scenarios;
  m.n_entities = cfg.n_entities;
  m.generation_seed = cfg.seed;
  return m;
}

}  // namespace

std::vector<double> scenario_biases(const SimConfig& cfg) {
  std::vector<double> biases(cfg.n_scenarios);
  for (int s = 0; s < cfg.n_scenarios; ++s) {
    std::mt19937_64 rng(mix_seed(cfg.seed, 0x7363656eULL + s));
    std::uniform_real_distribution<double> u(-cfg.scenario_bias_amp, cfg.scenario_bias_amp);
    biases[s] = u(rng);
  }
  return biases;
}

int active_category(const UserTrace& trace, std::int64_t t) {
  int cat = trace.segments.front().category;
  for (const auto& seg : trace.segments) {
    if (seg.start > t) break;
    cat = seg.category;
  }
  return cat;
}

SimResult simulate(const SimConfig& cfg) {
  if (cfg.n_users <= 0 || cfg.n_items <= 0 || cfg.n_categories <= 0 ||
      cfg.n_scenarios <= 0 || cfg.horizon <= 0)
    throw std::invalid_argument("simulator config: counts and horizon must be positive");
  if (cfg.n_items % cfg.n_categories != 0)
    throw std::invalid_argument("simulator config: n_items must be a multiple of n_categories");

  const data::DatasetMeta meta = make_meta(cfg);
  const std::vector<double> biases = scenario_biases(cfg);
  const std::int64_t split_time =
      static_cast<std::int64_t>(cfg.horizon * cfg.train_fraction);

  SimResult result;
  result.train.meta = meta;
  result.test.meta = meta;
  result.traces.reserve(cfg.n_users);

  for (int user = 0; user < cfg.n_users; ++user) {
    std::mt19937_64 rng(mix_seed(cfg.seed, 0x75736572ULL ^ static_cast<std::uint64_t>(user)));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_int_distribution<std::int64_t> utime(1, cfg.horizon - 1);
    std::uniform_int_distribution<int> ucat(0, cfg.n_categories - 1);
    std::uniform_int_distribution<int> uscen(0, cfg.n_scenarios - 1);
    std::uniform_int_distribution<int> uentity(1, cfg.n_entities - 1);
    std::normal_distribution<double> noise(0.0, cfg.noise_std);
    std::normal_distribution<double> ubias_draw(0.0, cfg.user_bias_std);
    const double user_bias = ubias_draw(rng);
    // slow per-user, per-scenario propensity drift: one draw per scenario per
    // half of the horizon, so most pair windows fall inside a single drift
    // regime. Contrasts within one scenario cancel it; contrasts across
    // scenarios difference two independent draws instead.
    std::normal_distribution<double> drift_draw(0.0, cfg.user_drift_std);
    std::array<std::vector<double>, 2> drift;
    for (auto& half : drift) {
      half.resize(cfg.n_scenarios);
      for (double& d : half) d = drift_draw(rng);
    }
    const std::int64_t drift_len = cfg.horizon / 2 + 1;
    const std::int64_t block_len = cfg.horizon / 4 + 1;
    // per-user scenario habit: interaction bias the feature set cannot express
    std::normal_distribution<double> habit_draw(0.0, cfg.user_scenario_bias_std);
    std::vector<double> habit(cfg.n_scenarios);
    for (double& hb : habit) hb = habit_draw(rng);
    // coupon campaigns: per-user per-block enrollment; enrolled blocks emit
    // coupon-heavy movelines and lift the click logit while the campaign
    // schedule runs (it empties out before the final block)
    std::array<bool, 4> campaign{};
    for (bool& c : campaign) c = u01(rng) < cfg.campaign_rate;

    UserTrace trace;
    trace.user_id = user;
    std::poisson_distribution<int> pshift(cfg.intent_shift_rate);
    const int n_shifts = pshift(rng);
    std::vector<std::int64_t> shift_times;
    for (int i = 0; i < n_shifts; ++i) shift_times.push_back(utime(rng));
    std::sort(shift_times.begin(), shift_times.end());
    trace.segments.push_back({0, ucat(rng)});
    for (std::int64_t st : shift_times) {
      int cat = ucat(rng);
      if (cat == trace.segments.back().category) cat = (cat + 1) % cfg.n_categories;
      trace.segments.push_back({st, cat});
    }

    std::poisson_distribution<int> pevents(cfg.events_per_user);
    const int n_events = pevents(rng);
    std::vector<std::int64_t> times;
    times.reserve(n_events);
    for (int i = 0; i < n_events; ++i) times.push_back(utime(rng));
    std::sort(times.begin(), times.end());
    for (std::size_t i = 1; i < times.size(); ++i)
      if (times[i] <= times[i - 1]) times[i] = times[i - 1] + 1;

    const int age = static_cast<int>(mix_seed(cfg.seed, 0x616765ULL ^ user) % cfg.n_age_buckets);
    const int act =
        static_cast<int>(mix_seed(cfg.seed, 0x616374ULL ^ user) % cfg.n_activity_buckets);

    std::vector<RawNode> moveline_hist;
    std::vector<ItemFeatures> aiseq_hist;
    std::vector<ItemFeatures> click_hist;

    for (std::int64_t t : times) {
      const int intent = active_category(trace, t);
      if (u01(rng) < cfg.impression_prob) {
        // channel impression
        Impression imp;
        imp.user_id = user;
        imp.age_bucket = age;
        imp.activity_bucket = act;
        imp.scenario_id = uscen(rng);
        imp.timestamp = t;
        const bool want_aligned = u01(rng) < cfg.aligned_target_prob;
        const int target_cat = want_aligned ? intent : ucat(rng);
        imp.target = make_item(draw_item_in_category(target_cat, cfg, rng), cfg);
        const bool aligned = imp.target.category_id == intent;
        const std::size_t block = static_cast<std::size_t>(t / block_len);
        const double lift =
            campaign[block] && block + 1 < campaign.size() ? cfg.campaign_lift : 0.0;
        const double logit = cfg.base_click_logit + user_bias +
                             drift[static_cast<std::size_t>(t / drift_len)][imp.scenario_id] +
                             lift +
                             habit[imp.scenario_id] +
                             cfg.signal_strength * (aligned ? 1.0 : 0.0) +
                             biases[imp.scenario_id] + noise(rng);
        imp.label = u01(rng) < sigmoid(logit) ? 1 : 0;

        for (const auto& raw : tail(moveline_hist, meta.moveline_cap)) {
          imp.moveline.nodes.push_back(
              {raw.kind, raw.timestamp, raw.category_id, raw.entity_id,
               data::recency_bucket(t - raw.timestamp, meta.recency_bounds)});
        }
        imp.aiseq = tail(aiseq_hist, meta.aiseq_cap);
        imp.short_seq = tail(click_hist, meta.short_cap);
        imp.long_seq = tail(click_hist, meta.long_cap);

        auto& target_ds = t < split_time ? result.train : result.test;
        target_ds.impressions.push_back(std::move(imp));

        moveline_hist.push_back({SceneKind::kChannelVisit, t, 0,
                                 1 + static_cast<int>(t % (cfg.n_entities - 1))});
        if (target_ds.impressions.back().label == 1)
          click_hist.push_back(target_ds.impressions.back().target);
      } else {
        // scene event
        RawNode node;
        node.kind = campaign[static_cast<std::size_t>(t / block_len)] && u01(rng) < 0.5
                        ? SceneKind::kCouponCollect
                        : draw_scene_kind(rng);
        node.timestamp = t;
        node.category_id = u01(rng) < cfg.off_intent_rate ? ucat(rng) : intent;
        node.entity_id = node.kind == SceneKind::kHomepageFeed ? 0 : uentity(rng);
        if (node.kind == SceneKind::kSearchResult || node.kind == SceneKind::kShopVisit) {
          std::uniform_int_distribution<int> nexp(1, 3);
          const int n = nexp(rng);
          for (int i = 0; i < n; ++i)
            aiseq_hist.push_back(
                make_item(draw_item_in_category(node.category_id, cfg, rng), cfg));
        }
        moveline_hist.push_back(node);
      }
    }
    result.traces.push_back(std::move(trace));
  }
  return result;
}

void write_trace(const std::vector<UserTrace>& traces, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  for (const auto& tr : traces) {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : tr.segments) segs.push_back({s.start, s.category});
    out << nlohmann::json{{"u", tr.user_id}, {"segments", segs}}.dump() << "\n";
  }
}

std::int64_t fig1_triple_count(const data::Dataset& ds,
                               const std::vector<UserTrace>& traces) {
  std::map<int, std::vector<const Impression*>> by_user;
  for (const auto& imp : ds.impressions) by_user[imp.user_id].push_back(&imp);
  std::int64_t count = 0;
  for (const auto& [user, imps] : by_user) {
    const UserTrace* trace = nullptr;
    for (const auto& tr : traces)
      if (tr.user_id == user) {
        trace = &tr;
        break;
      }
    if (!trace) continue;
    for (const auto* a : imps) {
      if (a->label != 0) continue;
      for (const auto* b : imps) {
        if (b->label != 1) continue;
        if (b->timestamp <= a->timestamp + 60) continue;
        if (b->target.category_id != active_category(*trace, b->timestamp)) continue;
        if (a->moveline == b->moveline) continue;
        ++count;
      }
    }
  }
  return count;
}

}  // namespace amen::sim
