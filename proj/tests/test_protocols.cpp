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

#include <algorithm>
#include <cmath>
#include <map>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "kpd/bench/protocols.hpp"
#include "kpd/bench/synthetic.hpp"
#include "oracles.hpp"

using namespace kpd;
using namespace kpd::bench;

namespace {

// Random unit rows; rows sharing a label are identical copies.
DescriptorSet copies(const std::vector<std::int64_t>& labels, int d, std::uint64_t seed, bool duplicate) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  DescriptorSet s;
  s.variant = Variant::postprocessed;
  s.values.resize(static_cast<Eigen::Index>(labels.size()), d);
  s.degenerate.assign(labels.size(), 0);
  std::map<std::int64_t, Eigen::RowVectorXd> seen;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Eigen::RowVectorXd v(d);
    for (int j = 0; j < d; ++j) v(j) = n01(rng);
    v.normalize();
    if (duplicate) {
      auto [it, fresh] = seen.emplace(labels[i], v);
      v = it->second;
    }
    s.values.row(static_cast<Eigen::Index>(i)) = v;
  }
  return s;
}

struct Synthetic {
  LabeledPatchSet data;
  DescriptorSet polar;
};

const Synthetic& synthetic() {
  static const Synthetic s = [] {
    SyntheticSetOptions o;
    o.points = 80;
    o.width = 32;
    o.seed = 21;
    Synthetic out;
    out.data = make_synthetic_set(o);
    out.polar = extract_serial(DescriptorExtractor{}, out.data.patches, Variant::polar);
    return out;
  }();
  return s;
}

VerificationOptions small_opts() {
  VerificationOptions o;
  o.positives = 300;
  o.negatives = 300;
  return o;
}

}  // namespace

TEST(Report, TextCurveAndFiles) {
  EvalReport r;
  r.protocol = "verification";
  r.config = {{"descriptor", "polar"}};
  r.set_metric("fpr95", 0.125);
  r.set_metric("fpr95", 0.25);
  EXPECT_EQ(r.metric("fpr95"), 0.25);
  EXPECT_THROW(r.metric("map"), std::out_of_range);
  EXPECT_EQ(r.to_text(), "protocol=verification\ndescriptor=polar\nfpr95=0.25\n");
  r.curve_columns = {"t", "fpr95"};
  r.curve = {{0.5, 0.1}};
  EXPECT_EQ(r.curve_csv(), "t,fpr95\n0.5,0.10000000000000001\n");
  const auto dir = std::filesystem::temp_directory_path() / "kpd_report_test";
  std::filesystem::create_directories(dir);
  r.write(dir / "r.txt");
  EXPECT_TRUE(std::filesystem::exists(dir / "r.csv"));
  std::filesystem::remove_all(dir);
}

TEST(Verification, DeterministicReports) {
  const auto& s = synthetic();
  const auto a = eval_verification(s.polar, s.data.meta(), small_opts(), {{"descriptor", "polar"}});
  const auto b = eval_verification(s.polar, s.data.meta(), small_opts(), {{"descriptor", "polar"}});
  EXPECT_EQ(a.to_text(), b.to_text());
  EXPECT_EQ(a.metric("pairs"), 600.0);
  auto other = small_opts();
  other.seed = 2;
  EXPECT_NE(eval_verification(s.polar, s.data.meta(), other).to_text(), a.to_text());
}

TEST(Verification, DuplicatePositivesVersusNoise) {
  std::vector<std::int64_t> labels;
  for (int i = 0; i < 400; ++i) labels.push_back(i / 2);
  const auto set = copies(labels, 32, 3, true);
  PatchLabels meta{labels, std::vector<int>(400, 0), std::vector<int>(400, 0)};
  const auto r = eval_verification(set, meta, small_opts());
  EXPECT_EQ(r.metric("fpr95"), 0.0);
  EXPECT_NEAR(r.metric("map"), 1.0, 1e-12);
}

TEST(Matching, IdenticalViewsGivePerfectMap) {
  std::vector<std::int64_t> labels;
  std::vector<int> groups, views;
  for (int g = 0; g < 2; ++g) {
    for (int v = 0; v < 3; ++v) {
      for (int r = 0; r < 25; ++r) {
        labels.push_back(100 * g + r);
        groups.push_back(g);
        views.push_back(v);
      }
    }
  }
  const auto set = copies(labels, 24, 4, true);
  const auto r = eval_matching(set, {labels, groups, views});
  EXPECT_NEAR(r.metric("map"), 1.0, 1e-12);
  EXPECT_EQ(r.metric("image_pairs"), 4.0);
  const auto tag = std::find(r.config.begin(), r.config.end(), std::pair<std::string, std::string>{"protocol_variant", "HP-approx"});
  EXPECT_NE(tag, r.config.end());

  std::vector<int> only_ref(labels.size(), 0);
  EXPECT_THROW(eval_matching(set, {labels, groups, only_ref}), std::invalid_argument);
}

TEST(Retrieval, NoiseIsNearChance) {
  const int n = 3000, distractors = 20;
  std::vector<std::int64_t> labels;
  std::vector<int> views;
  for (int i = 0; i < 2 * n; ++i) {
    labels.push_back(i / 2);
    views.push_back(i % 2);
  }
  const auto set = copies(labels, 16, 5, false);
  RetrievalOptions o;
  o.distractors = distractors;
  const auto r = eval_retrieval(set, {labels, std::vector<int>(2 * n, 0), views}, o);
  EXPECT_EQ(r.metric("queries"), static_cast<double>(n));
  EXPECT_NEAR(r.metric("map"), oracle::chance_ap(1, distractors + 1), 0.02);

  const auto perfect = eval_retrieval(copies(labels, 16, 5, true), {labels, std::vector<int>(2 * n, 0), views}, o);
  EXPECT_NEAR(perfect.metric("map"), 1.0, 1e-12);
}

TEST(ShrinkageSweep, GridPointsMatchSingleRuns) {
  const auto& s = synthetic();
  const auto opts = small_opts();
  const std::vector<double> t_grid = {0.0, 1.0};
  const auto sweep = sweep_shrinkage(s.polar, s.polar, s.data.meta(), WhiteningVariant::attenuated, t_grid, 64, opts);
  ASSERT_EQ(sweep.points.size(), 2u);
  EXPECT_EQ(sweep.summary.curve_columns.front(), "t");
  for (std::size_t k = 0; k < 2; ++k) {
    WhiteningConfig cfg;
    cfg.variant = WhiteningVariant::attenuated;
    cfg.t = t_grid[k];
    cfg.dim = 64;
    const auto model = fit_whitening(s.polar, {}, cfg);
    const auto single = eval_verification(apply(model, s.polar), s.data.meta(), opts);
    EXPECT_EQ(sweep.points[k].metric("fpr95"), single.metric("fpr95"));
    EXPECT_EQ(sweep.summary.curve[k][1], single.metric("fpr95"));
  }
  const double best = std::min(sweep.summary.curve[0][1], sweep.summary.curve[1][1]);
  EXPECT_EQ(sweep.summary.metric("best_fpr95"), best);

  const std::vector<double> idx = {1, 40, 100};
  const auto by_index = sweep_shrinkage(s.polar, s.polar, s.data.meta(), WhiteningVariant::shrinkage, idx, 64, opts);
  EXPECT_EQ(by_index.summary.curve_columns.front(), "shrink_index");
  ASSERT_EQ(by_index.summary.curve.size(), 3u);
  EXPECT_EQ(by_index.summary.curve[2][0], 100.0);
  EXPECT_NO_THROW(by_index.summary.metric("best_shrink_index"));

  EXPECT_THROW(sweep_shrinkage(s.polar, s.polar, s.data.meta(), WhiteningVariant::attenuated, {}, 64, opts),
               std::invalid_argument);
  EXPECT_THROW(sweep_shrinkage(s.polar, s.polar, s.data.meta(), WhiteningVariant::pca, t_grid, 64, opts),
               std::invalid_argument);
  const std::vector<double> fractional = {2.5};
  EXPECT_THROW(sweep_shrinkage(s.polar, s.polar, s.data.meta(), WhiteningVariant::shrinkage, fractional, 64, opts),
               std::invalid_argument);
}

TEST(SyntheticSweep, ZeroTransformIsUntransformed) {
  const auto& s = synthetic();
  const auto opts = small_opts();
  const std::vector<SyntheticTransform> grid = {SyntheticTransform::rotation(0.0), SyntheticTransform::translation(0),
                                                SyntheticTransform::rotation(20.0)};
  const std::vector<SynthConfig> configs = {{"P", Variant::polar, nullptr}};
  const auto sweep = sweep_synthetic(s.data, grid, configs, DescriptorExtractor{}, opts);
  const auto plain = eval_verification(s.polar, s.data.meta(), opts);
  ASSERT_EQ(sweep.summary.curve.size(), 3u);
  EXPECT_EQ(sweep.summary.curve_columns, (std::vector<std::string>{"kind", "amount", "fpr95_P"}));
  EXPECT_EQ(sweep.summary.curve[0][2], plain.metric("fpr95"));
  EXPECT_EQ(sweep.summary.curve[1][2], plain.metric("fpr95"));
  EXPECT_EQ(sweep.summary.curve[1][0], 1.0);
  EXPECT_EQ(sweep.summary.curve[2][1], 20.0);

  EXPECT_THROW(sweep_synthetic(s.data, {}, configs, DescriptorExtractor{}, opts), std::invalid_argument);
  const std::vector<SyntheticTransform> too_far = {SyntheticTransform::rotation(45.0)};
  EXPECT_THROW(sweep_synthetic(s.data, too_far, configs, DescriptorExtractor{}, opts), std::invalid_argument);
}

TEST(SyntheticSet, DeterministicAndLabeled) {
  SyntheticSetOptions o;
  o.points = 5;
  o.views = 3;
  o.width = 16;
  o.first_label = 10;
  const auto a = make_synthetic_set(o), b = make_synthetic_set(o);
  ASSERT_EQ(a.size(), 15u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.labels[i], b.labels[i]);
    EXPECT_TRUE(std::equal(a.patches[i].intensities().begin(), a.patches[i].intensities().end(),
                           b.patches[i].intensities().begin()));
    EXPECT_GE(a.labels[i], 10);
  }
  o.seed = 2;
  const auto c = make_synthetic_set(o);
  EXPECT_FALSE(std::equal(a.patches[0].intensities().begin(), a.patches[0].intensities().end(),
                          c.patches[0].intensities().begin()));
}
