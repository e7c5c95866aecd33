// amen command-line driver; all work goes through the C API in amen/amen_c.h.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "amen/amen_c.h"

namespace {

std::vector<const char*> c_strs(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

int finish(amen_status status) {
  if (status != AMEN_OK) {
    std::fprintf(stderr, "error: %s\n", amen_last_error());
    return static_cast<int>(status);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AMEN CTR model: synthetic movelines, TSP training, evaluation"};
  app.require_subcommand(1);

  std::string config, train_out, test_out, trace_out;
  std::vector<std::string> overrides;
  auto* generate = app.add_subcommand("generate", "generate a synthetic moveline dataset");
  generate->add_option("--config", config, "simulator config (flat JSON)")->required();
  generate->add_option("--set", overrides, "config override key=value (repeatable)");
  generate->add_option("--out-train", train_out, "training dataset path")->required();
  generate->add_option("--out-test", test_out, "test dataset path")->required();
  generate->add_option("--out-trace", trace_out, "intent trace sidecar path");

  std::string pair_in, pair_out, pair_report, domain = "same_scenario";
  std::int64_t min_gap = 60, max_gap = 604800;
  std::uint64_t pair_seed = 1;
  auto* pair = app.add_subcommand("pair", "mine TSP contrastive pairs into the dataset");
  pair->add_option("--in", pair_in, "input dataset")->required();
  pair->add_option("--out", pair_out, "paired dataset output")->required();
  pair->add_option("--report", pair_report, "coverage report output");
  pair->add_option("--domain", domain, "same_scenario or global");
  pair->add_option("--min-gap", min_gap, "minimum pair gap in seconds");
  pair->add_option("--max-gap", max_gap, "maximum pair gap in seconds");
  pair->add_option("--seed", pair_seed, "sampling seed");

  std::string ckpt_out, log_out;
  auto* train = app.add_subcommand("train", "train a model from an experiment config");
  train->add_option("--config", config, "experiment config (flat JSON)")->required();
  train->add_option("--set", overrides, "config override key=value (repeatable)");
  train->add_option("--out-checkpoint", ckpt_out, "checkpoint output")->required();
  train->add_option("--log", log_out, "per-batch training log output");

  std::string ckpt_in, dataset, report_out, dump_out;
  auto* evaluate = app.add_subcommand("evaluate", "run inference-mode evaluation");
  evaluate->add_option("--checkpoint", ckpt_in, "checkpoint path")->required();
  evaluate->add_option("--data", dataset, "dataset path")->required();
  evaluate->add_option("--report", report_out, "metrics report output");
  evaluate->add_option("--dump", dump_out, "per-record eval dump output");

  std::string table_out;
  auto* ablate = app.add_subcommand("ablate", "run the ablation grid");
  ablate->add_option("--config", config, "experiment config (flat JSON)")->required();
  ablate->add_option("--set", overrides, "config override key=value (repeatable)");
  ablate->add_option("--out", table_out, "comparison table output")->required();

  std::string dump_tsp, dump_non;
  auto* analyze = app.add_subcommand("analyze-reward",
                                     "moveline reward distribution analysis of two dumps");
  analyze->add_option("--tsp", dump_tsp, "eval dump of the TSP-trained model")->required();
  analyze->add_option("--non-tsp", dump_non, "eval dump of the non-TSP model")->required();
  analyze->add_option("--report", report_out, "analysis report output")->required();
  analyze->add_option("--table", table_out, "plot-ready bucket table output");

  CLI11_PARSE(app, argc, argv);
  const auto ov = c_strs(overrides);
  const int nov = static_cast<int>(ov.size());

  if (generate->parsed()) {
    return finish(amen_generate(config.c_str(), ov.data(), nov, train_out.c_str(),
                                test_out.c_str(),
                                trace_out.empty() ? nullptr : trace_out.c_str()));
  }
  if (pair->parsed()) {
    double coverage = 0.0;
    const amen_status s =
        amen_pair(pair_in.c_str(), pair_out.c_str(),
                  pair_report.empty() ? nullptr : pair_report.c_str(), domain.c_str(),
                  min_gap, max_gap, pair_seed, &coverage);
    if (s == AMEN_OK) std::printf("coverage_rate %.6f\n", coverage);
    return finish(s);
  }
  if (train->parsed()) {
    return finish(amen_train(config.c_str(), ov.data(), nov, ckpt_out.c_str(),
                             log_out.empty() ? nullptr : log_out.c_str()));
  }
  if (evaluate->parsed()) {
    double auc = 0.0, gauc = 0.0;
    const amen_status s = amen_evaluate(ckpt_in.c_str(), dataset.c_str(),
                                        report_out.empty() ? nullptr : report_out.c_str(),
                                        dump_out.empty() ? nullptr : dump_out.c_str(),
                                        &auc, &gauc);
    if (s == AMEN_OK) std::printf("auc %.6f gauc %.6f\n", auc, gauc);
    return finish(s);
  }
  if (ablate->parsed()) {
    return finish(amen_ablate(config.c_str(), ov.data(), nov, table_out.c_str()));
  }
  if (analyze->parsed()) {
    return finish(amen_analyze_reward(dump_tsp.c_str(), dump_non.c_str(),
                                      report_out.c_str(),
                                      table_out.empty() ? nullptr : table_out.c_str()));
  }
  return 0;
}
