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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kpd/bench/dataset.hpp"
#include "kpd/bench/metrics.hpp"
#include "kpd/descriptor.hpp"
#include "kpd/patch.hpp"
#include "kpd/whitening.hpp"

namespace kpd::bench {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Result of one protocol run. Text form is `key=value` lines in insertion
/// order (protocol, config echo, metrics with %.17g); the curve, when present,
/// serializes as CSV with a header row.
struct EvalReport {
  std::string protocol;
  KeyValues config;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> curve_columns;
  std::vector<std::vector<double>> curve;

  // Throws std::out_of_range for an unknown metric.
  double metric(const std::string& name) const;
  void set_metric(const std::string& name, double value);

  std::string to_text() const;
  std::string curve_csv() const;
  // Writes the text report to `path` and, when a curve exists, the CSV next
  // to it with extension ".csv".
  void write(const std::filesystem::path& path) const;
};

// Batch helpers shared by the sweeps. aggregate_all runs in parallel and is
// deterministic; assemble_set normalizes raw blocks into one variant.
std::vector<RawBlocks> aggregate_all(const DescriptorExtractor& extractor, std::span<const Patch> patches,
                                     int threads = 0);
DescriptorSet assemble_set(std::span<const RawBlocks> blocks, Variant variant, CombineMode mode);

struct VerificationOptions {
  std::size_t positives = 5000;
  std::size_t negatives = 5000;
  double recall = 0.95;
  std::uint64_t seed = 1;
};

/// Balanced seeded pair sample scored by dot product. Metrics: fpr95 (at the
/// requested recall), map (AP of the pair ranking), pairs.
EvalReport eval_verification(const DescriptorSet& set, const PatchLabels& labels, const VerificationOptions& options,
                             const KeyValues& echo = {});
EvalReport eval_verification_pairs(const DescriptorSet& set, const PairSample& sample, double recall,
                                   const KeyValues& echo = {});

/// For every sequence (group) and every target view v > 0, each reference
/// patch takes its nearest neighbour in view v. The matches are ranked by
/// similarity and scored by AP of the correct ones (0 when none is correct).
/// map is the mean over (sequence, view) pairs. Throws std::invalid_argument
/// when no sequence has a target view.
EvalReport eval_matching(const DescriptorSet& set, const PatchLabels& labels, const KeyValues& echo = {});

struct RetrievalOptions {
  std::size_t distractors = 100;
  std::uint64_t seed = 1;
};

/// Each reference-view patch queries a pool of its true correspondences plus
/// `distractors` patches with other labels, drawn with the seeded generator.
/// map is the mean AP over queries that have at least one correspondence.
EvalReport eval_retrieval(const DescriptorSet& set, const PatchLabels& labels, const RetrievalOptions& options,
                          const KeyValues& echo = {});

struct WhiteningConfig {
  WhiteningVariant variant = WhiteningVariant::supervised;
  double t = kDefaultAttenuation;
  int shrink_index = kDefaultShrinkIndex;
  int dim = kDefaultOutputDim;
  // Cap on matching pairs used for the intraclass covariance (0 = all).
  std::size_t max_pairs = 100000;
  std::uint64_t seed = 1;
};

KeyValues echo(const WhiteningConfig& cfg);

/// Fits on the non-degenerate rows of a training set. Supervised whitening
/// needs matching pairs from `labels`, or explicitly given `pairs`.
WhiteningModel fit_whitening(const DescriptorSet& train, const PatchLabels& labels, const WhiteningConfig& cfg,
                             std::optional<std::span<const IndexPair>> pairs = std::nullopt);

struct SweepResult {
  std::vector<EvalReport> points;
  EvalReport summary;  // one curve row per grid point
};

/// One verification run per grid value with a single shared pair sample.
/// For attenuated whitening the grid holds t values, for shrinkage whitening
/// eigenvalue indices. Throws std::invalid_argument for an empty grid or
/// another whitening variant.
SweepResult sweep_shrinkage(const DescriptorSet& train, const DescriptorSet& test, const PatchLabels& test_labels,
                            WhiteningVariant variant, std::span<const double> grid, int dim,
                            const VerificationOptions& options);

struct SynthConfig {
  std::string name;  // e.g. "P+W_S"
  Variant variant = Variant::polar;
  const WhiteningModel* model = nullptr;  // nullptr = raw descriptor
};

/// FPR95 per transform and config. The pair sample is drawn once; the second
/// patch of every pair is transformed before extraction. Throws
/// std::invalid_argument for an empty grid or an out-of-range transform.
SweepResult sweep_synthetic(const LabeledPatchSet& set, std::span<const SyntheticTransform> grid,
                            std::span<const SynthConfig> configs, const DescriptorExtractor& extractor,
                            const VerificationOptions& options);

}  // namespace kpd::bench
