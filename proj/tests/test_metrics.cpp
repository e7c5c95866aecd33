#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "core/metrics.hpp"
#include "oracles.hpp"

using namespace amen;
using metrics::EvalRecord;

namespace {

std::vector<EvalRecord> random_records(std::uint64_t seed, int n, int n_users,
                                       int score_levels = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.001, 0.999);
  std::vector<EvalRecord> recs(n);
  for (auto& r : recs) {
    r.user_id = static_cast<int>(rng() % n_users);
    r.label = static_cast<int>(rng() % 2);
    // quantized scores force tie runs when score_levels > 0
    r.y_hat = score_levels > 0
                  ? (1.0 + static_cast<double>(rng() % score_levels)) / (score_levels + 1)
                  : uni(rng);
    r.reward = uni(rng) * 2.0 - 1.0;
  }
  // guarantee both classes
  recs[0].label = 0;
  recs[1].label = 1;
  return recs;
}

double brute_auc(const std::vector<EvalRecord>& recs) {
  std::vector<double> scores;
  std::vector<int> labels;
  long long pos = 0, neg = 0;
  for (const auto& r : recs) {
    scores.push_back(r.y_hat);
    labels.push_back(r.label);
    (r.label == 1 ? pos : neg) += 1;
  }
  return static_cast<double>(oracle::auc_numerator_x2(scores, labels)) /
         (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

}  // namespace

TEST_CASE("auc basics") {
  std::vector<EvalRecord> perfect = {
      {0, 0.9, 0, 1}, {0, 0.8, 0, 1}, {0, 0.2, 0, 0}, {0, 0.1, 0, 0}};
  CHECK(metrics::auc(perfect) == 1.0);

  std::vector<EvalRecord> ties = {{0, 0.5, 0, 1}, {0, 0.5, 0, 0}, {0, 0.5, 0, 1}};
  CHECK(metrics::auc(ties) == 0.5);

  std::vector<EvalRecord> single = {{0, 0.3, 0, 1}, {0, 0.7, 0, 1}};
  CHECK_THROWS_AS(metrics::auc(single), metrics::MetricError);
}

TEST_CASE("rank-sum auc equals brute-force pair counting exactly") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    // alternate tie-heavy and continuous score sets
    const int levels = (seed % 2 == 0) ? 7 : 0;
    auto recs = random_records(seed, 200, 25, levels);
    CHECK(metrics::auc(recs) == brute_auc(recs));
  }
}

TEST_CASE("auc invariant under strictly increasing score transform") {
  auto recs = random_records(11, 150, 10, 9);
  const double base = metrics::auc(recs);
  for (auto& r : recs) r.y_hat = 1.0 / (1.0 + std::exp(-(5.0 * r.y_hat - 1.0)));
  CHECK(metrics::auc(recs) == base);
}

TEST_CASE("auc symmetric under label flip with score negation") {
  auto recs = random_records(12, 120, 10, 5);
  const double base = metrics::auc(recs);
  for (auto& r : recs) {
    r.label = 1 - r.label;
    r.y_hat = -r.y_hat;
  }
  CHECK(metrics::auc(recs) == base);
}

TEST_CASE("gauc hand example: weights 4 and 2 give 5/6") {
  std::vector<EvalRecord> recs = {
      // user 1: AUC 1.0 over 4 impressions
      {1, 0.9, 0, 1}, {1, 0.8, 0, 1}, {1, 0.2, 0, 0}, {1, 0.1, 0, 0},
      // user 2: AUC 0.5 over 2 impressions (tie)
      {2, 0.5, 0, 1}, {2, 0.5, 0, 0},
      // user 3: single-class, excluded
      {3, 0.99, 0, 1}};
  CHECK(metrics::gauc(recs) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("gauc equals auc for a single user") {
  auto recs = random_records(13, 80, 1, 6);
  CHECK(metrics::gauc(recs) == metrics::auc(recs));
}

TEST_CASE("gauc invariant to per-user monotone transforms") {
  auto recs = random_records(14, 200, 8, 6);
  const double base = metrics::gauc(recs);
  for (auto& r : recs) r.y_hat = (r.user_id + 1) * std::exp(r.y_hat);
  CHECK(metrics::gauc(recs) == base);
}

TEST_CASE("gauc throws when no user has both classes") {
  std::vector<EvalRecord> recs = {{1, 0.5, 0, 1}, {2, 0.6, 0, 0}};
  CHECK_THROWS_AS(metrics::gauc(recs), metrics::MetricError);
}

TEST_CASE("reward_distribution constant rewards is degenerate") {
  std::vector<EvalRecord> a = {{0, 0.5, 2.0, 1}, {0, 0.5, 2.0, 0}};
  auto b = random_records(15, 50, 4);
  auto dist = metrics::reward_distribution(a, b);
  CHECK(dist.degenerate_a);
  CHECK_FALSE(dist.degenerate_b);
  CHECK(dist.a_click.occupied == 1);
  CHECK(dist.a_unclick.occupied == 1);
}

TEST_CASE("reward_distribution separates rewards equal to labels") {
  std::vector<EvalRecord> a;
  for (int i = 0; i < 40; ++i) a.push_back({0, 0.5, static_cast<double>(i % 2), i % 2});
  auto dist = metrics::reward_distribution(a, a);
  CHECK(dist.a_click.proportions.back() == 1.0);
  CHECK(dist.a_unclick.proportions.front() == 1.0);
  CHECK(dist.a_click.mean_bucket == metrics::kRewardBuckets - 1);
  CHECK(dist.a_unclick.mean_bucket == 0.0);
}

TEST_CASE("reward_distribution proportions sum to 1 and occupied counts are sane") {
  auto a = random_records(16, 300, 12);
  auto b = random_records(17, 300, 12);
  auto dist = metrics::reward_distribution(a, b);
  for (const auto* c : {&dist.a_click, &dist.a_unclick, &dist.b_click, &dist.b_unclick}) {
    REQUIRE(c->proportions.size() == metrics::kRewardBuckets);
    double s = 0.0;
    int occ = 0;
    for (double p : c->proportions) {
      CHECK(p >= 0.0);
      s += p;
      if (p > 0.0) ++occ;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(c->occupied == occ);
  }
  CHECK(dist.occupied_a <= metrics::kRewardBuckets);
  CHECK(dist.occupied_a >= std::max(dist.a_click.occupied, dist.a_unclick.occupied));
}
