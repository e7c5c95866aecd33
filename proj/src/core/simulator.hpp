#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "data.hpp"

namespace amen::sim {

struct SimConfig {
  int n_users = 1500;
  int n_items = 2000;
  int n_categories = 40;
  int n_shops = 200;
  int n_scenarios = 4;
  int n_price_buckets = 8;
  int n_age_buckets = 6;
  int n_activity_buckets = 4;
  int n_entities = 512;
  std::int64_t horizon = 14 * 86400;
  double intent_shift_rate = 6.0;   // Poisson mean change-points per user
  double events_per_user = 80.0;    // Poisson mean events per user
  double impression_prob = 0.4;     // event is a channel impression, else a scene event
  double off_intent_rate = 0.3;     // scene events drawn off the active intent
  double aligned_target_prob = 0.3; // impressions whose target matches the intent
  double signal_strength = 4.0;     // beta: weight of intent alignment in the click logit
  double base_click_logit = -2.0;
  double scenario_bias_amp = 1.5;   // per-scenario additive click-logit bias range
  double noise_std = 0.3;
  double user_bias_std = 1.0;       // per-user additive click-logit propensity spread
  double user_drift_std = 2.5;  // per-user per-scenario half-horizon propensity drift
  double user_scenario_bias_std = 0.0;  // per-user-per-scenario habit bias spread
  double campaign_rate = 0.0;       // per-user-per-block coupon campaign enrollment
  double campaign_lift = 2.0;       // click-logit lift while a campaign block runs
  double train_fraction = 0.8;      // time split point as a fraction of the horizon
  std::uint64_t seed = 1;
};

struct IntentSegment {
  std::int64_t start = 0;
  int category = 0;
};

struct UserTrace {
  int user_id = 0;
  std::vector<IntentSegment> segments;  // piecewise-constant preferred category
};

struct SimResult {
  data::Dataset train;
  data::Dataset test;
  std::vector<UserTrace> traces;
};

// deterministic: identical config -> identical result; users are generated
// independently from derived seeds and merged in user order
SimResult simulate(const SimConfig& cfg);

std::vector<double> scenario_biases(const SimConfig& cfg);
int active_category(const UserTrace& trace, std::int64_t t);

void write_trace(const std::vector<UserTrace>& traces, const std::string& path);

// count (unclicked t0, clicked intent-aligned t1 > t0+60s, differing movelines)
// triples; the structure the TSP contrast trains on
std::int64_t fig1_triple_count(const data::Dataset& ds,
                               const std::vector<UserTrace>& traces);

}  // namespace amen::sim
