#include "data.hpp"

#include <fstream>

#include <json.hpp>

#include "util.hpp"

namespace amen::data {

using nlohmann::json;

namespace {

json item_to_json(const ItemFeatures& it) {
  return json::array({it.item_id, it.category_id, it.shop_id, it.price_bucket});
}

ItemFeatures item_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ValidationError("malformed item features");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

json seq_to_json(const std::vector<ItemFeatures>& seq) {
  json arr = json::array();
  for (const auto& it : seq) arr.push_back(item_to_json(it));
  return arr;
}

std::vector<ItemFeatures> seq_from_json(const json& j) {
  std::vector<ItemFeatures> out;
  for (const auto& e : j) out.push_back(item_from_json(e));
  return out;
}

json meta_json(const DatasetMeta& m) {
  return json{{"n_users", m.n_users},
              {"n_items", m.n_items},
              {"n_categories", m.n_categories},
              {"n_shops", m.n_shops},
              {"n_price_buckets", m.n_price_buckets},
              {"n_age_buckets", m.n_age_buckets},
              {"n_activity_buckets", m.n_activity_buckets},
              {"n_scenarios", m.n_scenarios},
              {"n_entities", m.n_entities},
              {"moveline_cap", m.moveline_cap},
              {"aiseq_cap", m.aiseq_cap},
              {"short_cap", m.short_cap},
              {"long_cap", m.long_cap},
              {"recency_bounds", m.recency_bounds},
              {"generation_seed", m.generation_seed}};
}

DatasetMeta meta_from_json(const json& j) {
  DatasetMeta m;
  m.n_users = j.at("n_users").get<int>();
  m.n_items = j.at("n_items").get<int>();
  m.n_categories = j.at("n_categories").get<int>();
  m.n_shops = j.at("n_shops").get<int>();
  m.n_price_buckets = j.at("n_price_buckets").get<int>();
  m.n_age_buckets = j.at("n_age_buckets").get<int>();
  m.n_activity_buckets = j.at("n_activity_buckets").get<int>();
  m.n_scenarios = j.at("n_scenarios").get<int>();
  m.n_entities = j.at("n_entities").get<int>();
  m.moveline_cap = j.at("moveline_cap").get<int>();
  m.aiseq_cap = j.at("aiseq_cap").get<int>();
  m.short_cap = j.at("short_cap").get<int>();
  m.long_cap = j.at("long_cap").get<int>();
  m.recency_bounds = j.at("recency_bounds").get<std::vector<std::int64_t>>();
  m.generation_seed = j.at("generation_seed").get<std::uint64_t>();
  return m;
}

void check_id(int id, int vocab, const char* field, std::int64_t line) {
  if (id < 0 || id >= vocab) {
    throw ValidationError("line " + std::to_string(line) + ": field '" + field + "' id " +
                          std::to_string(id) + " outside vocabulary of size " +
                          std::to_string(vocab));
  }
}

void check_item(const ItemFeatures& it, const DatasetMeta& m, const char* field,
                std::int64_t line) {
  const std::string f = field;
  check_id(it.item_id, m.n_items, (f + ".item_id").c_str(), line);
  check_id(it.category_id, m.n_categories, (f + ".category_id").c_str(), line);
  check_id(it.shop_id, m.n_shops, (f + ".shop_id").c_str(), line);
  check_id(it.price_bucket, m.n_price_buckets, (f + ".price_bucket").c_str(), line);
}

}  // namespace

int recency_bucket(std::int64_t age_seconds, const std::vector<std::int64_t>& bounds) {
  for (std::size_t i = 0; i < bounds.size(); ++i)
    if (age_seconds <= bounds[i]) return static_cast<int>(i);
  return static_cast<int>(bounds.size());
}

void validate_impression(const Impression& imp, const DatasetMeta& meta, std::int64_t line) {
  check_id(imp.user_id, meta.n_users, "user_id", line);
  check_id(imp.age_bucket, meta.n_age_buckets, "age_bucket", line);
  check_id(imp.activity_bucket, meta.n_activity_buckets, "activity_bucket", line);
  check_id(imp.scenario_id, meta.n_scenarios, "scenario_id", line);
  check_item(imp.target, meta, "target", line);
  if (imp.label != 0 && imp.label != 1)
    throw ValidationError("line " + std::to_string(line) + ": non-binary label");

  const auto& nodes = imp.moveline.nodes;
  if (static_cast<int>(nodes.size()) > meta.moveline_cap)
    throw ValidationError("line " + std::to_string(line) + ": moveline exceeds cap");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    check_id(static_cast<int>(n.kind), kSceneKindCount, "moveline.kind", line);
    check_id(n.category_id, meta.n_categories, "moveline.category_id", line);
    check_id(n.entity_id, meta.n_entities, "moveline.entity_id", line);
    if (n.timestamp >= imp.timestamp)
      throw ValidationError("line " + std::to_string(line) +
                            ": moveline node not earlier than impression");
    if (i > 0 && nodes[i - 1].timestamp > n.timestamp)
      throw ValidationError("line " + std::to_string(line) +
                            ": moveline timestamps decrease");
    const int expect = recency_bucket(imp.timestamp - n.timestamp, meta.recency_bounds);
    if (n.recency_bucket != expect)
      throw ValidationError("line " + std::to_string(line) +
                            ": moveline.recency_bucket inconsistent with timestamps");
  }
  if (static_cast<int>(imp.aiseq.size()) > meta.aiseq_cap)
    throw ValidationError("line " + std::to_string(line) + ": aiseq exceeds cap");
  if (static_cast<int>(imp.short_seq.size()) > meta.short_cap)
    throw ValidationError("line " + std::to_string(line) + ": short_seq exceeds cap");
  if (static_cast<int>(imp.long_seq.size()) > meta.long_cap)
    throw ValidationError("line " + std::to_string(line) + ": long_seq exceeds cap");
  for (const auto& it : imp.aiseq) check_item(it, meta, "aiseq", line);
  for (const auto& it : imp.short_seq) check_item(it, meta, "short_seq", line);
  for (const auto& it : imp.long_seq) check_item(it, meta, "long_seq", line);
}

std::string meta_to_json(const DatasetMeta& meta) { return meta_json(meta).dump(); }

std::uint64_t meta_hash(const DatasetMeta& meta) { return fnv1a(meta_to_json(meta)); }

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("dataset file has no header: " + path);
  Dataset ds;
  try {
    json header = json::parse(line);
    if (header.value("amen_dataset", 0) != 1)
      throw ValidationError("not an amen dataset header");
    ds.meta = meta_from_json(header.at("meta"));
  } catch (const json::exception& e) {
    throw ValidationError("line 1: malformed header: " + std::string(e.what()));
  }
  std::int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ds.impressions.push_back(impression_from_line(line, ds.meta, line_no));
  }
  return ds;
}

Impression impression_from_line(const std::string& line, const DatasetMeta& meta,
                                std::int64_t line_no) {
  Impression imp;
  try {
    json j = json::parse(line);
    imp.user_id = j.at("u").get<int>();
    imp.age_bucket = j.at("age").get<int>();
    imp.activity_bucket = j.at("act").get<int>();
    imp.scenario_id = j.at("sc").get<int>();
    imp.timestamp = j.at("ts").get<std::int64_t>();
    imp.label = j.at("y").get<int>();
    imp.target = item_from_json(j.at("t"));
    for (const auto& n : j.at("mv")) {
      if (!n.is_array() || n.size() != 5) throw ValidationError("malformed moveline node");
      imp.moveline.nodes.push_back({static_cast<SceneKind>(n[0].get<int>()),
                                    n[1].get<std::int64_t>(), n[2].get<int>(),
                                    n[3].get<int>(), n[4].get<int>()});
    }
    imp.aiseq = seq_from_json(j.at("ais"));
    imp.short_seq = seq_from_json(j.at("ss"));
    imp.long_seq = seq_from_json(j.at("ls"));
    if (j.contains("diff")) imp.diff_index = j.at("diff").get<std::int64_t>();
  } catch (const json::exception& e) {
    throw ValidationError("line " + std::to_string(line_no) + ": malformed record: " +
                          std::string(e.what()));
  }
  validate_impression(imp, meta, line_no);
  return imp;
}

void write_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  out << json{{"amen_dataset", 1}, {"meta", meta_json(ds.meta)}}.dump() << "\n";
  for (const auto& imp : ds.impressions) {
    json mv = json::array();
    for (const auto& n : imp.moveline.nodes)
      mv.push_back(json::array({static_cast<int>(n.kind), n.timestamp, n.category_id,
                                n.entity_id, n.recency_bucket}));
    json j{{"u", imp.user_id},       {"age", imp.age_bucket},
           {"act", imp.activity_bucket}, {"sc", imp.scenario_id},
           {"ts", imp.timestamp},    {"y", imp.label},
           {"t", item_to_json(imp.target)}, {"mv", mv},
           {"ais", seq_to_json(imp.aiseq)}, {"ss", seq_to_json(imp.short_seq)},
           {"ls", seq_to_json(imp.long_seq)}};
    if (imp.diff_index) j["diff"] = *imp.diff_index;
    out << j.dump() << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace amen::data
