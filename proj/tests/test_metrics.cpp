#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "ffvos/core/error.hpp"
#include "ffvos/metrics.hpp"
#include "oracles.hpp"

using namespace ffvos;
using namespace ffvos::metrics;

TEST(Jaccard, Examples) {
  const BinaryMask m = oracle::rect_mask(4, 4, {0, 0, 4, 2});
  EXPECT_EQ(jaccard(m, m), 1.0);
  EXPECT_EQ(jaccard(m, oracle::rect_mask(4, 4, {0, 2, 4, 2})), 0.0);
  EXPECT_NEAR(jaccard(m, oracle::rect_mask(4, 4, {0, 1, 4, 2})), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(jaccard(BinaryMask(4, 4), BinaryMask(4, 4)), 1.0);
  EXPECT_EQ(jaccard(BinaryMask(4, 4), m), 0.0);
  EXPECT_THROW(jaccard(BinaryMask(4, 4), BinaryMask(4, 5)), InvalidInput);
}

TEST(Jaccard, SymmetricAndBounded) {
  std::mt19937_64 rng(6);
  std::bernoulli_distribution coin(0.3);
  for (int t = 0; t < 100; ++t) {
    BinaryMask a(7, 5), b(7, 5);
    for (std::size_t i = 0; i < a.pixel_count(); ++i) {
      a.set(i, coin(rng));
      b.set(i, coin(rng));
    }
    const double j = jaccard(a, b);
    EXPECT_EQ(j, jaccard(b, a));
    EXPECT_GE(j, 0.0);
    EXPECT_LE(j, 1.0);
  }
}

TEST(JMean, Examples) {
  EXPECT_NEAR(j_mean({{{"a", {0.5, 0.7}}}}), 0.6, 1e-12);
  EXPECT_NEAR(j_mean({{{"a", {0.4}}, {"b", {0.8, 0.8, 0.8}}}}), 0.6, 1e-12);
  EXPECT_THROW(j_mean({}), InvalidInput);
  EXPECT_THROW(j_mean({{{"a", {}}}}), InvalidInput);
}

TEST(JRecall, Examples) {
  const EvalReport r{{{"a", {0.6, 0.4, 0.7}}}};
  EXPECT_NEAR(j_recall(r, 0.5), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(j_recall({{{"a", {0.6, 0.9}}, {"b", {0.51}}}}, 0.5), 1.0);
  EXPECT_EQ(j_recall({{{"a", {0.5}}}}, 0.5), 0.0);  // strictly greater
}

TEST(JRecall, SequenceMode) {
  const EvalReport r{{{"a", {0.6, 0.6}}, {"b", {0.9, 0.0}}, {"c", {0.2, 0.3}}}};
  EXPECT_NEAR(j_recall(r, 0.5, RecallMode::sequence), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(j_recall(r, 0.5, RecallMode::frame), (1.0 + 0.5 + 0.0) / 3.0, 1e-12);
  EXPECT_EQ(parse_recall_mode("sequence"), RecallMode::sequence);
  EXPECT_THROW(parse_recall_mode("frames"), ConfigError);
  EXPECT_THROW(j_recall(r, 1.0), InvalidInput);
}

TEST(JDecay, Examples) {
  EXPECT_NEAR(j_decay({{{"a", std::vector<double>(9, 0.7)}}}), 0.0, 1e-12);
  EXPECT_NEAR(j_decay({{{"a", {0.9, 0.8, 0.7, 0.6}}}}), 0.3, 1e-12);
  EXPECT_THROW(j_decay({{{"a", {0.9, 0.8, 0.7}}}}), InvalidInput);
}

TEST(JDecay, BinsGiveRemainderToEarlierBins) {
  EXPECT_EQ(decay_bins(4), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(decay_bins(6), (std::vector<std::size_t>{0, 2, 4, 5, 6}));
  EXPECT_EQ(decay_bins(7), (std::vector<std::size_t>{0, 2, 4, 6, 7}));
  EXPECT_EQ(decay_bins(40), (std::vector<std::size_t>{0, 10, 20, 30, 40}));
  // 6 frames: bins {0,1} {2,3} {4} {5}.
  EXPECT_NEAR(j_decay({{{"a", {1.0, 0.8, 0.5, 0.5, 0.3, 0.2}}}}), 0.9 - 0.2, 1e-12);
}

TEST(JDecay, TimeReversalNegates) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int n : {4, 8, 12, 40}) {
    std::vector<double> j(n);
    for (double& v : j) v = u(rng);
    std::vector<double> rev(j.rbegin(), j.rend());
    EXPECT_NEAR(j_decay({{{"a", rev}}}), -j_decay({{{"a", j}}}), 1e-12);
  }
}

TEST(Aggregates, InvariantToSequenceOrder) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  EvalReport r;
  for (int s = 0; s < 6; ++s) {
    std::vector<double> j(4 + s);
    for (double& v : j) v = u(rng);
    r.sequences.push_back({"s" + std::to_string(s), j});
  }
  const double m = j_mean(r), o = j_recall(r, 0.5), d = j_decay(r);
  for (int t = 0; t < 5; ++t) {
    std::shuffle(r.sequences.begin(), r.sequences.end(), rng);
    EXPECT_NEAR(j_mean(r), m, 1e-12);
    EXPECT_NEAR(j_recall(r, 0.5), o, 1e-12);
    EXPECT_NEAR(j_decay(r), d, 1e-12);
  }
}

TEST(Report, JsonAndCsv) {
  const EvalReport r{{{"a", {0.9, 0.8, 0.7, 0.6}}, {"b", {1.0, 1.0, 1.0, 1.0}}}};
  const auto j = report_json(r, 0.5, RecallMode::frame);
  EXPECT_EQ(j["sequences"].size(), 2u);
  EXPECT_EQ(j["sequences"][0]["name"], "a");
  EXPECT_EQ(j["sequences"][0]["per_frame_j"].size(), 4u);
  EXPECT_NEAR(j["j_mean"].get<double>(), 0.875, 1e-12);
  EXPECT_NEAR(j["j_decay"].get<double>(), 0.15, 1e-12);
  EXPECT_EQ(j["recall_mode"], "frame");
  EXPECT_EQ(j["tau"], 0.5);
  const std::string csv = report_csv(r, 0.5, RecallMode::frame);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "name,frames,j_mean,j_recall,j_decay");
  EXPECT_NE(csv.find("\nb,4,1,1,0\n"), std::string::npos);
}
