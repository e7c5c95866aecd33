#include "harness.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "optimizer.hpp"
#include "util.hpp"

namespace amen::harness {

using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed config file " + path + ": " + e.what());
  }
}

void apply_overrides(json& j, const std::vector<std::string>& overrides) {
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override must be key=value: " + ov);
    const std::string key = ov.substr(0, eq);
    const std::string raw = ov.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::exception&) {
      value = raw;  // bare strings allowed
    }
    j[key] = value;
  }
}

template <typename T>
void take(json& j, const char* key, T& field) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      field = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
    j.erase(it);
  }
}

void take_domain(json& j, const char* key, tsp::Domain& field) {
  std::string s;
  take(j, key, s);
  if (s.empty()) return;
  if (s == "same_scenario")
    field = tsp::Domain::kSameScenario;
  else if (s == "global")
    field = tsp::Domain::kGlobal;
  else
    throw ConfigError("config key 'domain_constraint' must be same_scenario or global");
}

void reject_unknown(const json& j, const std::string& path) {
  if (!j.empty())
    throw ConfigError("unknown config key '" + j.begin().key() + "' in " + path);
}

std::string domain_name(tsp::Domain d) {
  return d == tsp::Domain::kSameScenario ? "same_scenario" : "global";
}

}  // namespace

model::ModelConfig ExperimentConfig::model_config() const {
  model::ModelConfig m;
  m.d = d;
  m.h = h;
  m.use_aiseq = use_aiseq;
  m.use_moveline_reward = use_moveline_reward;
  return m;
}

void ExperimentConfig::validate() const {
  if (use_tsp && !use_moveline_reward)
    throw ConfigError("use_tsp requires use_moveline_reward");
  if (d <= 0 || h <= 0 || d % h != 0) throw ConfigError("need d > 0 divisible by h");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (w1 < 0.0 || w2 < 0.0) throw ConfigError("loss weights must be non-negative");
  if (min_gap <= 0 || min_gap >= max_gap) throw ConfigError("need 0 < min_gap < max_gap");
}

ExperimentConfig load_experiment_config(const std::string& path,
                                        const std::vector<std::string>& overrides) {
  json j = load_json_file(path);
  apply_overrides(j, overrides);
  ExperimentConfig c;
  take(j, "train_path", c.train_path);
  take(j, "test_path", c.test_path);
  take(j, "d", c.d);
  take(j, "h", c.h);
  take(j, "use_aiseq", c.use_aiseq);
  take(j, "use_tsp", c.use_tsp);
  take(j, "use_moveline_reward", c.use_moveline_reward);
  take_domain(j, "domain_constraint", c.domain_constraint);
  take(j, "lr", c.lr);
  take(j, "eps", c.eps);
  take(j, "lr_decay", c.lr_decay);
  take(j, "batch_size", c.batch_size);
  take(j, "epochs", c.epochs);
  take(j, "w1", c.w1);
  take(j, "w2", c.w2);
  take(j, "min_gap", c.min_gap);
  take(j, "max_gap", c.max_gap);
  take(j, "init_seed", c.init_seed);
  take(j, "shuffle_seed", c.shuffle_seed);
  take(j, "pair_seed", c.pair_seed);
  take(j, "ablation_seeds", c.ablation_seeds);
  take(j, "w2_sweep", c.w2_sweep);
  reject_unknown(j, path);
  c.validate();
  return c;
}

sim::SimConfig load_sim_config(const std::string& path,
                               const std::vector<std::string>& overrides) {
  json j = load_json_file(path);
  apply_overrides(j, overrides);
  sim::SimConfig c;
  take(j, "n_users", c.n_users);
  take(j, "n_items", c.n_items);
  take(j, "n_categories", c.n_categories);
  take(j, "n_shops", c.n_shops);
  take(j, "n_scenarios", c.n_scenarios);
  take(j, "n_price_buckets", c.n_price_buckets);
  take(j, "n_age_buckets", c.n_age_buckets);
  take(j, "n_activity_buckets", c.n_activity_buckets);
  take(j, "n_entities", c.n_entities);
  take(j, "horizon", c.horizon);
  take(j, "intent_shift_rate", c.intent_shift_rate);
  take(j, "events_per_user", c.events_per_user);
  take(j, "impression_prob", c.impression_prob);
  take(j, "off_intent_rate", c.off_intent_rate);
  take(j, "aligned_target_prob", c.aligned_target_prob);
  take(j, "signal_strength", c.signal_strength);
  take(j, "base_click_logit", c.base_click_logit);
  take(j, "scenario_bias_amp", c.scenario_bias_amp);
  take(j, "noise_std", c.noise_std);
  take(j, "user_bias_std", c.user_bias_std);
  take(j, "user_drift_std", c.user_drift_std);
  take(j, "user_scenario_bias_std", c.user_scenario_bias_std);
  take(j, "campaign_rate", c.campaign_rate);
  take(j, "campaign_lift", c.campaign_lift);
  take(j, "train_fraction", c.train_fraction);
  take(j, "seed", c.seed);
  reject_unknown(j, path);
  return c;
}

TrainOutput train_in_memory(const data::Dataset& train, const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.use_tsp) {
    const bool any_pair = std::any_of(train.impressions.begin(), train.impressions.end(),
                                      [](const auto& i) { return i.diff_index.has_value(); });
    if (!any_pair)
      throw ConfigError("use_tsp requires a paired dataset (no diff column present)");
  }

  TrainOutput out;
  out.params = model::ModelParams::init(train.meta, cfg.model_config(), cfg.init_seed);
  const auto params = out.params.all();
  ad::AdaGrad opt({cfg.lr, cfg.eps, cfg.lr_decay});

  std::vector<std::int64_t> order(train.impressions.size());
  std::iota(order.begin(), order.end(), 0);
  const std::int64_t n = static_cast<std::int64_t>(order.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937_64 shuffle_rng(mix_seed(cfg.shuffle_seed, 0x65706f6368ULL + epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    int batch_no = 0;
    for (std::int64_t start = 0; start < n; start += cfg.batch_size, ++batch_no) {
      const std::int64_t end = std::min<std::int64_t>(start + cfg.batch_size, n);
      ad::Tape tape;
      out.params.zero_grad();
      std::vector<ad::TensorRef> ce_terms, bpr_terms;
      ce_terms.reserve(end - start);
      for (std::int64_t k = start; k < end; ++k) {
        const auto& imp = train.impressions[order[k]];
        const data::Impression* diff = nullptr;
        if (cfg.use_tsp && imp.diff_index)
          diff = &train.impressions.at(*imp.diff_index);
        auto fwd = model::forward(tape, imp, out.params, model::Mode::kTrain, diff);
        ce_terms.push_back(loss::ce_term(tape, fwd.y_hat_t, imp.label));
        if (diff)
          bpr_terms.push_back(
              loss::bpr_term(tape, fwd.r_t, fwd.r_diff_t, diff->label));
      }
      loss::BatchLoss bl;
      auto total = loss::fuse(tape, ce_terms, bpr_terms, cfg.w1, cfg.w2, &bl);
      tape.backward(total);
      opt.step(params);
      out.log.push_back({epoch, batch_no, bl});
    }
  }
  return out;
}

std::pair<std::vector<metrics::EvalRecord>, EvalReport> evaluate_in_memory(
    const model::ModelParams& params, const data::Dataset& ds) {
  std::vector<metrics::EvalRecord> records;
  records.reserve(ds.impressions.size());
  ad::Tape tape(false);
  for (const auto& imp : ds.impressions) {
    auto fwd = model::forward(tape, imp, params, model::Mode::kInference);
    records.push_back({imp.user_id, fwd.y_hat, fwd.r, imp.label});
  }
  EvalReport report;
  report.n = static_cast<std::int64_t>(records.size());
  for (const auto& r : records) report.positives += r.label;
  report.auc = metrics::auc(records);
  report.gauc = metrics::gauc(records);
  return {std::move(records), report};
}

void save_checkpoint(const model::ModelParams& params, const std::string& path) {
  json tensors = json::object();
  for (const auto& [name, t] : params.named())
    tensors[name] = json{{"shape", t->shape}, {"v", t->v}};
  json ckpt{{"amen_checkpoint", 1},
            {"meta", json::parse(data::meta_to_json(params.meta))},
            {"meta_hash", data::meta_hash(params.meta)},
            {"model",
             {{"d", params.cfg.d},
              {"h", params.cfg.h},
              {"use_aiseq", params.cfg.use_aiseq},
              {"use_moveline_reward", params.cfg.use_moveline_reward},
              {"main_hidden", params.cfg.main_hidden},
              {"reward_hidden", params.cfg.reward_hidden}}},
            {"tensors", tensors}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << ckpt.dump() << "\n";
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

model::ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json ckpt;
  try {
    ckpt = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed checkpoint " + path + ": " + e.what());
  }
  if (ckpt.value("amen_checkpoint", 0) != 1)
    throw std::runtime_error("not an amen checkpoint: " + path);

  // parse meta by writing it through a dataset header round trip
  json meta_j = ckpt.at("meta");
  data::DatasetMeta meta;
  {
    // reuse the dataset meta parser via a tiny in-memory header
    meta.n_users = meta_j.at("n_users").get<int>();
    meta.n_items = meta_j.at("n_items").get<int>();
    meta.n_categories = meta_j.at("n_categories").get<int>();
    meta.n_shops = meta_j.at("n_shops").get<int>();
    meta.n_price_buckets = meta_j.at("n_price_buckets").get<int>();
    meta.n_age_buckets = meta_j.at("n_age_buckets").get<int>();
    meta.n_activity_buckets = meta_j.at("n_activity_buckets").get<int>();
    meta.n_scenarios = meta_j.at("n_scenarios").get<int>();
    meta.n_entities = meta_j.at("n_entities").get<int>();
    meta.moveline_cap = meta_j.at("moveline_cap").get<int>();
    meta.aiseq_cap = meta_j.at("aiseq_cap").get<int>();
    meta.short_cap = meta_j.at("short_cap").get<int>();
    meta.long_cap = meta_j.at("long_cap").get<int>();
    meta.recency_bounds = meta_j.at("recency_bounds").get<std::vector<std::int64_t>>();
    meta.generation_seed = meta_j.at("generation_seed").get<std::uint64_t>();
  }
  model::ModelConfig mc;
  const json& mj = ckpt.at("model");
  mc.d = mj.at("d").get<int>();
  mc.h = mj.at("h").get<int>();
  mc.use_aiseq = mj.at("use_aiseq").get<bool>();
  mc.use_moveline_reward = mj.at("use_moveline_reward").get<bool>();
  mc.main_hidden = mj.at("main_hidden").get<std::vector<int>>();
  mc.reward_hidden = mj.at("reward_hidden").get<std::vector<int>>();

  auto params = model::ModelParams::init(meta, mc, 0);
  const json& tensors = ckpt.at("tensors");
  if (tensors.size() != params.named().size())
    throw std::runtime_error("checkpoint tensor set does not match model layout");
  for (const auto& [name, t] : params.named()) {
    const json& tj = tensors.at(name);
    if (tj.at("shape").get<std::vector<int>>() != t->shape)
      throw std::runtime_error("checkpoint tensor '" + name + "' has wrong shape");
    t->v = tj.at("v").get<std::vector<double>>();
  }
  return params;
}

void run_generate(const sim::SimConfig& cfg, const std::string& train_out,
                  const std::string& test_out, const std::string& trace_out) {
  auto result = sim::simulate(cfg);
  data::write_dataset(result.train, train_out);
  data::write_dataset(result.test, test_out);
  if (!trace_out.empty()) sim::write_trace(result.traces, trace_out);
}

tsp::CoverageReport run_pair(const std::string& dataset_in, const std::string& dataset_out,
                             const std::string& report_out, const tsp::SamplingConfig& cfg) {
  auto ds = data::read_dataset(dataset_in);
  auto report = tsp::pair_dataset(ds, cfg);
  data::write_dataset(ds, dataset_out);
  if (!report_out.empty()) {
    std::ofstream out(report_out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write coverage report: " + report_out);
    out << json{{"total_impressions", report.total_impressions},
                {"matched_impressions", report.matched_impressions},
                {"coverage_rate", report.coverage_rate},
                {"domain", domain_name(cfg.domain)},
                {"min_gap", cfg.min_gap},
                {"max_gap", cfg.max_gap},
                {"rng_seed", cfg.rng_seed}}
               .dump()
        << "\n";
  }
  return report;
}

void run_train(const ExperimentConfig& cfg, const std::string& checkpoint_out,
               const std::string& log_out) {
  auto train = data::read_dataset(cfg.train_path);
  auto result = train_in_memory(train, cfg);
  save_checkpoint(result.params, checkpoint_out);
  if (!log_out.empty()) {
    std::ofstream out(log_out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write training log: " + log_out);
    for (const auto& e : result.log)
      out << json{{"epoch", e.epoch},
                  {"batch", e.batch},
                  {"ce", e.loss.ce},
                  {"bpr", e.loss.bpr},
                  {"total", e.loss.total},
                  {"matched", e.loss.matched_count}}
                 .dump()
          << "\n";
  }
}

EvalReport run_evaluate(const std::string& checkpoint_path, const std::string& dataset_path,
                        const std::string& report_out, const std::string& dump_out) {
  auto params = load_checkpoint(checkpoint_path);
  auto ds = data::read_dataset(dataset_path);
  if (data::meta_hash(ds.meta) != data::meta_hash(params.meta))
    throw ConfigError("checkpoint and dataset metadata do not match");
  auto [records, report] = evaluate_in_memory(params, ds);
  if (!dump_out.empty()) {
    std::ofstream out(dump_out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write eval dump: " + dump_out);
    for (const auto& r : records)
      out << json{{"u", r.user_id}, {"y", r.label}, {"y_hat", r.y_hat}, {"r", r.reward}}
                 .dump()
          << "\n";
  }
  if (!report_out.empty()) {
    std::ofstream out(report_out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write eval report: " + report_out);
    out << json{{"auc", report.auc},
                {"gauc", report.gauc},
                {"n", report.n},
                {"positives", report.positives}}
               .dump()
        << "\n";
  }
  return report;
}

void run_ablate(const ExperimentConfig& base, const std::string& table_out) {
  base.validate();
  auto train = data::read_dataset(base.train_path);
  auto test = data::read_dataset(base.test_path);

  // pairing per domain, shared across variants
  data::Dataset train_same = train, train_global = train;
  auto cov_same = tsp::pair_dataset(
      train_same, {base.min_gap, base.max_gap, tsp::Domain::kSameScenario, base.pair_seed});
  auto cov_global = tsp::pair_dataset(
      train_global, {base.min_gap, base.max_gap, tsp::Domain::kGlobal, base.pair_seed});

  struct Variant {
    std::string name;
    ExperimentConfig cfg;
    const data::Dataset* train_ds;
  };
  std::vector<Variant> variants;
  auto add = [&](const std::string& name, auto mutate) {
    ExperimentConfig c = base;
    mutate(c);
    const data::Dataset* ds = &train_same;
    if (!c.use_tsp)
      ds = &train;
    else if (c.domain_constraint == tsp::Domain::kGlobal)
      ds = &train_global;
    variants.push_back({name, c, ds});
  };
  add("full", [](ExperimentConfig&) {});
  add("no_aiseq", [](ExperimentConfig& c) { c.use_aiseq = false; });
  add("no_tsp", [](ExperimentConfig& c) { c.use_tsp = false; });
  add("no_moveline", [](ExperimentConfig& c) {
    c.use_tsp = false;
    c.use_moveline_reward = false;
  });
  add("difgs", [](ExperimentConfig& c) { c.domain_constraint = tsp::Domain::kGlobal; });
  for (double w2 : base.w2_sweep) {
    if (w2 == base.w2) continue;
    add("w2_" + std::to_string(w2), [w2](ExperimentConfig& c) { c.w2 = w2; });
  }

  json rows = json::array();
  for (const auto& var : variants) {
    std::vector<double> aucs, gaucs;
    for (int s = 0; s < base.ablation_seeds; ++s) {
      ExperimentConfig c = var.cfg;
      c.init_seed = base.init_seed + s;
      c.shuffle_seed = base.shuffle_seed + s;
      auto trained = train_in_memory(*var.train_ds, c);
      auto [records, report] = evaluate_in_memory(trained.params, test);
      aucs.push_back(report.auc);
      gaucs.push_back(report.gauc);
    }
    const double auc_mean =
        std::accumulate(aucs.begin(), aucs.end(), 0.0) / aucs.size();
    const double gauc_mean =
        std::accumulate(gaucs.begin(), gaucs.end(), 0.0) / gaucs.size();
    rows.push_back(json{{"name", var.name},
                        {"use_aiseq", var.cfg.use_aiseq},
                        {"use_tsp", var.cfg.use_tsp},
                        {"use_moveline_reward", var.cfg.use_moveline_reward},
                        {"domain", domain_name(var.cfg.domain_constraint)},
                        {"w2", var.cfg.w2},
                        {"auc_mean", auc_mean},
                        {"gauc_mean", gauc_mean},
                        {"auc", aucs},
                        {"gauc", gaucs}});
  }
  json table{{"rows", rows},
             {"coverage",
              {{"same_scenario", cov_same.coverage_rate},
               {"global", cov_global.coverage_rate}}},
             {"seeds", base.ablation_seeds}};
  std::ofstream out(table_out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write ablation table: " + table_out);
  out << table.dump(2) << "\n";
}

std::vector<metrics::EvalRecord> read_dump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open eval dump: " + path);
  std::vector<metrics::EvalRecord> records;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      records.push_back({j.at("u").get<int>(), j.at("y_hat").get<double>(),
                         j.at("r").get<double>(), j.at("y").get<int>()});
    } catch (const json::exception& e) {
      throw std::runtime_error("eval dump " + path + " line " + std::to_string(line_no) +
                               ": " + e.what());
    }
  }
  return records;
}

void run_analyze_reward(const std::string& dump_a, const std::string& dump_b,
                        const std::string& report_out, const std::string& table_out) {
  auto a = read_dump(dump_a);
  auto b = read_dump(dump_b);
  auto dist = metrics::reward_distribution(a, b);
  auto curve_json = [](const metrics::RewardCurve& c) {
    return json{{"mean_bucket", c.mean_bucket}, {"occupied", c.occupied}};
  };
  json report{{"a_click", curve_json(dist.a_click)},
              {"a_unclick", curve_json(dist.a_unclick)},
              {"b_click", curve_json(dist.b_click)},
              {"b_unclick", curve_json(dist.b_unclick)},
              {"occupied_a", dist.occupied_a},
              {"occupied_b", dist.occupied_b},
              {"degenerate_a", dist.degenerate_a},
              {"degenerate_b", dist.degenerate_b}};
  std::ofstream out(report_out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write reward report: " + report_out);
  out << report.dump(2) << "\n";
  if (!table_out.empty()) {
    std::ofstream tab(table_out, std::ios::binary);
    if (!tab) throw std::runtime_error("cannot write reward table: " + table_out);
    tab << "bucket\ta_click\ta_unclick\tb_click\tb_unclick\n";
    for (int bkt = 0; bkt < metrics::kRewardBuckets; ++bkt)
      tab << bkt << "\t" << dist.a_click.proportions[bkt] << "\t"
          << dist.a_unclick.proportions[bkt] << "\t" << dist.b_click.proportions[bkt]
          << "\t" << dist.b_unclick.proportions[bkt] << "\n";
  }
}

}  // namespace amen::harness
