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
#include <span>
#include <vector>

#include "kpd/descriptor.hpp"
#include "kpd/whitening.hpp"

namespace kpd::bench {

/// Smallest false-positive rate over thresholds tau (accept score >= tau)
/// whose true-positive rate reaches `recall`. Tied scores are accepted
/// together. Throws std::invalid_argument without both positives and
/// negatives, on length mismatch, or for recall outside (0, 1].
double fpr_at_recall(std::span<const double> scores, std::span<const std::uint8_t> is_match, double recall = 0.95);

/// Mean of precision@k over the ranks k of relevant items, ranking by
/// descending score (stable on ties). Throws without relevant items.
double average_precision(std::span<const double> scores, std::span<const std::uint8_t> relevant);

struct PairSample {
  std::vector<IndexPair> pairs;
  std::vector<std::uint8_t> is_match;

  std::size_t size() const { return pairs.size(); }
};

/// Seeded balanced sampling: positives are two distinct patches with the same
/// label, negatives two patches with different labels. Throws
/// std::invalid_argument when the labels cannot supply the requested kinds.
PairSample sample_pairs(std::span<const std::int64_t> labels, std::size_t positives, std::size_t negatives,
                        std::uint64_t seed);

/// Every unordered matching pair; when more than `limit` exist (limit > 0),
/// a seeded subset of that size.
std::vector<IndexPair> matching_pairs(std::span<const std::int64_t> labels, std::size_t limit = 0,
                                      std::uint64_t seed = 1);

/// Dot products of the paired rows; pairs touching a degenerate row score 0.
/// Parallel over pairs.
std::vector<double> score_pairs(const DescriptorSet& set, std::span<const IndexPair> pairs);

}  // namespace kpd::bench
