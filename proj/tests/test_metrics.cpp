// Copyright 2026 The kpdesc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "kpd/bench/metrics.hpp"
#include "oracles.hpp"

using namespace kpd;
using namespace kpd::bench;

TEST(Fpr, SeparatedAndInverted) {
  const std::vector<double> s = {0.9, 0.8, 0.7, 0.3, 0.2, 0.1};
  const std::vector<std::uint8_t> m = {1, 1, 1, 0, 0, 0};
  EXPECT_EQ(fpr_at_recall(s, m), 0.0);
  const std::vector<std::uint8_t> inv = {0, 0, 0, 1, 1, 1};
  EXPECT_EQ(fpr_at_recall(s, inv), 1.0);
}

TEST(Fpr, TiesAreAcceptedTogether) {
  // One positive tied with all negatives: any threshold reaching it takes them too.
  const std::vector<double> s = {1.0, 0.5, 0.5, 0.5};
  const std::vector<std::uint8_t> m = {1, 1, 0, 0};
  EXPECT_EQ(fpr_at_recall(s, m, 1.0), 1.0);
  EXPECT_EQ(fpr_at_recall(s, m, 0.5), 0.0);
}

TEST(Fpr, MatchesBruteForce) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> coarse(0, 6);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s(20);
    std::vector<std::uint8_t> m(20);
    for (int i = 0; i < 20; ++i) {
      m[i] = coin(rng);
      s[i] = 0.1 * coarse(rng) + (m[i] ? 0.15 : 0.0);
    }
    m[0] = 1;
    m[1] = 0;
    for (double r : {0.5, 0.95, 1.0}) EXPECT_DOUBLE_EQ(fpr_at_recall(s, m, r), oracle::fpr_bruteforce(s, m, r));
  }
}

TEST(Fpr, MonotoneInSeparation) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  std::vector<double> base(2000);
  std::vector<std::uint8_t> m(2000);
  for (int i = 0; i < 2000; ++i) {
    m[i] = i % 2;
    base[i] = n01(rng);
  }
  double last = 1.0;
  for (double shift : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    std::vector<double> s(base);
    for (int i = 0; i < 2000; ++i) s[i] += m[i] ? shift : 0.0;
    const double f = fpr_at_recall(s, m);
    EXPECT_LE(f, last);
    last = f;
  }
  EXPECT_EQ(last, 0.0);
}

TEST(Fpr, RejectsBadInput) {
  const std::vector<double> s = {0.1, 0.2};
  EXPECT_THROW(fpr_at_recall(s, std::vector<std::uint8_t>{1, 1}), std::invalid_argument);
  EXPECT_THROW(fpr_at_recall(s, std::vector<std::uint8_t>{0, 0}), std::invalid_argument);
  EXPECT_THROW(fpr_at_recall(s, std::vector<std::uint8_t>{1}), std::invalid_argument);
  EXPECT_THROW(fpr_at_recall(s, std::vector<std::uint8_t>{1, 0}, 0.0), std::invalid_argument);
  EXPECT_THROW(fpr_at_recall(s, std::vector<std::uint8_t>{1, 0}, 1.5), std::invalid_argument);
}

TEST(AveragePrecision, HandCases) {
  EXPECT_EQ(average_precision(std::vector<double>{3, 2, 1}, std::vector<std::uint8_t>{1, 1, 0}), 1.0);
  // Relevant at ranks 2 and 3: (1/2 + 2/3) / 2.
  EXPECT_NEAR(average_precision(std::vector<double>{3, 2, 1}, std::vector<std::uint8_t>{0, 1, 1}), 7.0 / 12.0, 1e-15);
  EXPECT_NEAR(average_precision(std::vector<double>{5, 4, 3, 2}, std::vector<std::uint8_t>{0, 0, 0, 1}), 0.25, 1e-15);
  EXPECT_THROW(average_precision(std::vector<double>{1, 2}, std::vector<std::uint8_t>{0, 0}), std::invalid_argument);
}

TEST(AveragePrecision, MatchesNaiveRecount) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> coarse(0, 9);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(50);
    std::vector<std::uint8_t> r(50);
    for (int i = 0; i < 50; ++i) {
      s[i] = coarse(rng);
      r[i] = coin(rng);
    }
    r[7] = 1;
    EXPECT_NEAR(average_precision(s, r), oracle::ap_naive(s, r), 1e-14);
  }
}

TEST(AveragePrecision, RandomRankingApproachesChance) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u;
  const int n = 30, relevant = 4;
  double sum = 0;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> s(n);
    std::vector<std::uint8_t> r(n, 0);
    for (int i = 0; i < n; ++i) s[i] = u(rng);
    for (int i = 0; i < relevant; ++i) r[i] = 1;
    sum += average_precision(s, r);
  }
  EXPECT_NEAR(sum / trials, oracle::chance_ap(relevant, n), 0.005);
}

TEST(PairSampling, LabelsAndDeterminism) {
  std::vector<std::int64_t> labels;
  for (int i = 0; i < 60; ++i) labels.push_back(i / 3);
  const auto a = sample_pairs(labels, 200, 300, 9);
  const auto b = sample_pairs(labels, 200, 300, 9);
  ASSERT_EQ(a.size(), 500u);
  EXPECT_EQ(a.pairs, b.pairs);
  EXPECT_EQ(a.is_match, b.is_match);
  int pos = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto [i, j] = a.pairs[k];
    EXPECT_NE(i, j);
    EXPECT_EQ(labels[i] == labels[j], a.is_match[k] == 1);
    pos += a.is_match[k];
  }
  EXPECT_EQ(pos, 200);
  EXPECT_NE(sample_pairs(labels, 200, 300, 10).pairs, a.pairs);

  const std::vector<std::int64_t> singletons = {0, 1, 2};
  EXPECT_THROW(sample_pairs(singletons, 1, 1, 1), std::invalid_argument);
  const std::vector<std::int64_t> one_label = {5, 5, 5};
  EXPECT_THROW(sample_pairs(one_label, 1, 1, 1), std::invalid_argument);
}

TEST(PairSampling, MatchingPairsEnumeratesAndCaps) {
  const std::vector<std::int64_t> labels = {0, 0, 0, 1, 1, 2};
  const auto all = matching_pairs(labels);
  EXPECT_EQ(all.size(), 4u);  // 3 from label 0, 1 from label 1
  const std::set<IndexPair> set(all.begin(), all.end());
  EXPECT_EQ(set.size(), 4u);
  const auto capped = matching_pairs(labels, 2, 3);
  EXPECT_EQ(capped.size(), 2u);
  for (const auto& p : capped) EXPECT_TRUE(set.count(p));
  EXPECT_EQ(matching_pairs(labels, 2, 3), capped);
}

TEST(PairScoring, DotProductsAndDegenerateRows) {
  DescriptorSet s;
  s.variant = Variant::polar;
  s.values.resize(3, 2);
  s.values << 1, 0, 0.6, 0.8, 0, 0;
  s.degenerate = {0, 0, 1};
  const std::vector<IndexPair> pairs = {{0, 1}, {1, 1}, {0, 2}};
  const auto sc = score_pairs(s, pairs);
  EXPECT_NEAR(sc[0], 0.6, 1e-15);
  EXPECT_NEAR(sc[1], 1.0, 1e-15);
  EXPECT_EQ(sc[2], 0.0);
}
