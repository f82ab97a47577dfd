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

#include "kpd/bench/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include "kpd/bench/random.hpp"

namespace kpd::bench {

double fpr_at_recall(std::span<const double> scores, std::span<const std::uint8_t> is_match, double recall) {
  if (scores.size() != is_match.size()) throw std::invalid_argument("scores and labels differ in length");
  if (!(recall > 0.0 && recall <= 1.0)) throw std::invalid_argument("recall must lie in (0, 1]");
  std::size_t pos = 0;
  for (auto m : is_match) pos += m ? 1 : 0;
  const std::size_t neg = is_match.size() - pos;
  if (pos == 0 || neg == 0) throw std::invalid_argument("FPR needs at least one positive and one negative");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  // Descending sweep: TPR and FPR only grow, so the first threshold that
  // reaches the target recall has the smallest FPR.
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double tau = scores[order[i]];
    while (i < order.size() && scores[order[i]] == tau) {
      if (is_match[order[i]]) ++tp; else ++fp;
      ++i;
    }
    if (static_cast<double>(tp) >= recall * static_cast<double>(pos)) {
      return static_cast<double>(fp) / static_cast<double>(neg);
    }
  }
  return static_cast<double>(fp) / static_cast<double>(neg);
}

double average_precision(std::span<const double> scores, std::span<const std::uint8_t> relevant) {
  if (scores.size() != relevant.size()) throw std::invalid_argument("scores and relevance differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (relevant[order[k]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  if (hits == 0) throw std::invalid_argument("average precision needs at least one relevant item");
  return sum / static_cast<double>(hits);
}

PairSample sample_pairs(std::span<const std::int64_t> labels, std::size_t positives, std::size_t negatives,
                        std::uint64_t seed) {
  std::map<std::int64_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);

  // Patches whose label has at least one other member, in index order.
  std::vector<std::size_t> pairable;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (groups[labels[i]].size() >= 2) pairable.push_back(i);
  }
  if (positives > 0 && pairable.empty()) throw std::invalid_argument("no label has two patches; cannot form positives");
  if (negatives > 0 && groups.size() < 2) throw std::invalid_argument("a single label cannot form negative pairs");

  Rng rng(seed);
  PairSample out;
  out.pairs.reserve(positives + negatives);
  for (std::size_t k = 0; k < positives; ++k) {
    const std::size_t a = pairable[rng.index(pairable.size())];
    const auto& members = groups[labels[a]];
    std::size_t b = a;
    while (b == a) b = members[rng.index(members.size())];
    out.pairs.emplace_back(a, b);
    out.is_match.push_back(1);
  }
  for (std::size_t k = 0; k < negatives; ++k) {
    const std::size_t a = rng.index(labels.size());
    std::size_t b = a;
    while (labels[b] == labels[a]) b = rng.index(labels.size());
    out.pairs.emplace_back(a, b);
    out.is_match.push_back(0);
  }
  return out;
}

std::vector<IndexPair> matching_pairs(std::span<const std::int64_t> labels, std::size_t limit, std::uint64_t seed) {
  std::map<std::int64_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  std::vector<IndexPair> out;
  for (const auto& [label, members] : groups) {
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) out.emplace_back(members[i], members[j]);
    }
  }
  if (limit > 0 && out.size() > limit) {
    // Partial Fisher-Yates with the portable generator.
    Rng rng(seed);
    for (std::size_t k = 0; k < limit; ++k) {
      const std::size_t pick = k + rng.index(out.size() - k);
      std::swap(out[k], out[pick]);
    }
    out.resize(limit);
  }
  return out;
}

std::vector<double> score_pairs(const DescriptorSet& set, std::span<const IndexPair> pairs) {
  std::vector<double> scores(pairs.size(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
  const bool flags = set.degenerate.size() == set.size();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto [a, b] = pairs[static_cast<std::size_t>(k)];
    if (flags && (set.degenerate[a] || set.degenerate[b])) continue;
    scores[static_cast<std::size_t>(k)] =
        set.values.row(static_cast<Eigen::Index>(a)).dot(set.values.row(static_cast<Eigen::Index>(b)));
  }
  return scores;
}

}  // namespace kpd::bench
