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

#include "kpd/bench/protocols.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "kpd/bench/random.hpp"
#include "kpd/error.hpp"

namespace kpd::bench {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

KeyValues set_echo(const DescriptorSet& set, const KeyValues& extra) {
  KeyValues out{{"descriptor", std::string(to_string(set.variant))},
                {"dim", std::to_string(set.dim())},
                {"count", std::to_string(set.size())}};
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

double dot_rows(const DescriptorSet& set, std::size_t a, std::size_t b) {
  if (!set.degenerate.empty() && (set.degenerate[a] || set.degenerate[b])) return 0.0;
  return set.values.row(static_cast<Eigen::Index>(a)).dot(set.values.row(static_cast<Eigen::Index>(b)));
}

void check_labels(const DescriptorSet& set, const PatchLabels& labels) {
  if (labels.size() != set.size()) throw InputFormatError("label count does not match descriptor count");
}

}  // namespace

double EvalReport::metric(const std::string& name) const {
  for (const auto& [k, v] : metrics) {
    if (k == name) return v;
  }
  throw std::out_of_range("report has no metric " + name);
}

void EvalReport::set_metric(const std::string& name, double value) {
  for (auto& [k, v] : metrics) {
    if (k == name) {
      v = value;
      return;
    }
  }
  metrics.emplace_back(name, value);
}

std::string EvalReport::to_text() const {
  std::string out = "protocol=" + protocol + "\n";
  for (const auto& [k, v] : config) out += k + "=" + v + "\n";
  for (const auto& [k, v] : metrics) out += k + "=" + fmt(v) + "\n";
  return out;
}

std::string EvalReport::curve_csv() const {
  std::string out;
  for (std::size_t i = 0; i < curve_columns.size(); ++i) out += (i ? "," : "") + curve_columns[i];
  out += "\n";
  for (const auto& row : curve) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + fmt(row[i]);
    out += "\n";
  }
  return out;
}

void EvalReport::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputFormatError("cannot write report " + path.string());
  out << to_text();
  if (!curve.empty()) {
    auto csv_path = path;
    csv_path.replace_extension(".csv");
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw InputFormatError("cannot write curve " + csv_path.string());
    csv << curve_csv();
  }
}

std::vector<RawBlocks> aggregate_all(const DescriptorExtractor& extractor, std::span<const Patch> patches,
                                     int threads) {
  std::vector<RawBlocks> out(patches.size());
  for (const Patch& p : patches) extractor.prepare(p.width());
  const auto n = static_cast<std::ptrdiff_t>(patches.size());
  if (threads <= 0) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = extractor.aggregate(patches[i]);
  } else {
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = extractor.aggregate(patches[i]);
  }
  return out;
}

DescriptorSet assemble_set(std::span<const RawBlocks> blocks, Variant variant, CombineMode mode) {
  DescriptorSet set;
  set.variant = variant;
  set.degenerate.assign(blocks.size(), 0);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Descriptor d = assemble(blocks[i], variant, mode);
    if (i == 0) set.values.resize(static_cast<Eigen::Index>(blocks.size()), d.dim());
    set.values.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(d.values.data(), d.dim());
    set.degenerate[i] = d.degenerate ? 1 : 0;
  }
  return set;
}

EvalReport eval_verification_pairs(const DescriptorSet& set, const PairSample& sample, double recall,
                                   const KeyValues& echo) {
  const auto scores = score_pairs(set, sample.pairs);
  EvalReport r;
  r.protocol = "verification";
  r.config = set_echo(set, echo);
  r.config.emplace_back("recall", fmt_short(recall));
  r.set_metric("fpr95", fpr_at_recall(scores, sample.is_match, recall));
  r.set_metric("map", average_precision(scores, sample.is_match));
  r.set_metric("pairs", static_cast<double>(sample.size()));
  return r;
}

EvalReport eval_verification(const DescriptorSet& set, const PatchLabels& labels, const VerificationOptions& o,
                             const KeyValues& echo) {
  check_labels(set, labels);
  const PairSample sample = sample_pairs(labels.labels, o.positives, o.negatives, o.seed);
  KeyValues e = echo;
  e.emplace_back("seed", std::to_string(o.seed));
  return eval_verification_pairs(set, sample, o.recall, e);
}

EvalReport eval_matching(const DescriptorSet& set, const PatchLabels& labels, const KeyValues& echo) {
  check_labels(set, labels);
  // (group, view) -> patch indices, in index order.
  std::map<std::pair<int, int>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < labels.size(); ++i) cells[{labels.groups[i], labels.views[i]}].push_back(i);

  double sum = 0.0;
  std::size_t evaluated = 0;
  for (const auto& [key, targets] : cells) {
    if (key.second == 0) continue;
    const auto ref_it = cells.find({key.first, 0});
    if (ref_it == cells.end()) continue;
    const auto& refs = ref_it->second;
    std::vector<double> best(refs.size(), -std::numeric_limits<double>::infinity());
    std::vector<std::uint8_t> correct(refs.size(), 0);
    const auto n = static_cast<std::ptrdiff_t>(refs.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
      std::size_t arg = targets.front();
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t t : targets) {
        const double s = dot_rows(set, refs[r], t);
        if (s > top) {
          top = s;
          arg = t;
        }
      }
      best[r] = top;
      correct[r] = labels.labels[arg] == labels.labels[refs[r]] ? 1 : 0;
    }
    const bool any = std::any_of(correct.begin(), correct.end(), [](auto c) { return c != 0; });
    sum += any ? average_precision(best, correct) : 0.0;
    ++evaluated;
  }
  if (evaluated == 0) throw std::invalid_argument("matching needs at least one sequence with a target view");
  EvalReport rep;
  rep.protocol = "matching";
  rep.config = set_echo(set, echo);
  rep.config.emplace_back("protocol_variant", "HP-approx");
  rep.set_metric("map", sum / static_cast<double>(evaluated));
  rep.set_metric("image_pairs", static_cast<double>(evaluated));
  return rep;
}

EvalReport eval_retrieval(const DescriptorSet& set, const PatchLabels& labels, const RetrievalOptions& o,
                          const KeyValues& echo) {
  check_labels(set, labels);
  std::map<std::int64_t, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < labels.size(); ++i) by_label[labels.labels[i]].push_back(i);

  // Pools are drawn serially so the result depends on the seed alone.
  Rng rng(o.seed);
  std::vector<std::size_t> queries;
  std::vector<std::vector<std::size_t>> pools;
  std::vector<std::size_t> relevant_count;
  for (std::size_t q = 0; q < labels.size(); ++q) {
    if (labels.views[q] != 0) continue;
    const auto& same = by_label[labels.labels[q]];
    std::vector<std::size_t> pool;
    for (std::size_t i : same) {
      if (i != q) pool.push_back(i);
    }
    if (pool.empty()) continue;
    const std::size_t others = labels.size() - same.size();
    if (others < o.distractors) throw std::invalid_argument("not enough patches to draw the requested distractors");
    const std::size_t rel = pool.size();
    // Distinct distractors by rejection; the pool stays small next to the set.
    std::vector<std::uint8_t> taken(labels.size(), 0);
    for (std::size_t k = 0; k < o.distractors; ++k) {
      std::size_t d = 0;
      do {
        d = rng.index(labels.size());
      } while (labels.labels[d] == labels.labels[q] || taken[d]);
      taken[d] = 1;
      pool.push_back(d);
    }
    queries.push_back(q);
    pools.push_back(std::move(pool));
    relevant_count.push_back(rel);
  }
  if (queries.empty()) throw std::invalid_argument("retrieval needs a reference patch with a correspondence");

  std::vector<double> ap(queries.size(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(queries.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto& pool = pools[k];
    std::vector<double> scores(pool.size());
    std::vector<std::uint8_t> rel(pool.size(), 0);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      scores[i] = dot_rows(set, queries[k], pool[i]);
      rel[i] = i < relevant_count[k] ? 1 : 0;
    }
    ap[k] = average_precision(scores, rel);
  }
  double sum = 0.0;
  for (double a : ap) sum += a;

  EvalReport rep;
  rep.protocol = "retrieval";
  rep.config = set_echo(set, echo);
  rep.config.emplace_back("protocol_variant", "HP-approx");
  rep.config.emplace_back("distractors", std::to_string(o.distractors));
  rep.config.emplace_back("seed", std::to_string(o.seed));
  rep.set_metric("map", sum / static_cast<double>(ap.size()));
  rep.set_metric("queries", static_cast<double>(ap.size()));
  return rep;
}

KeyValues echo(const WhiteningConfig& cfg) {
  KeyValues out{{"whitening", std::string(to_string(cfg.variant))}, {"whitening_dim", std::to_string(cfg.dim)}};
  if (cfg.variant == WhiteningVariant::attenuated) out.emplace_back("t", fmt_short(cfg.t));
  if (cfg.variant == WhiteningVariant::shrinkage) out.emplace_back("shrink_index", std::to_string(cfg.shrink_index));
  return out;
}

WhiteningModel fit_whitening(const DescriptorSet& train, const PatchLabels& labels, const WhiteningConfig& cfg,
                             std::optional<std::span<const IndexPair>> pairs) {
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train.degenerate.empty() || !train.degenerate[i]) keep.push_back(static_cast<Eigen::Index>(i));
  }
  RowMatrix rows(static_cast<Eigen::Index>(keep.size()), train.dim());
  for (std::size_t k = 0; k < keep.size(); ++k) rows.row(static_cast<Eigen::Index>(k)) = train.values.row(keep[k]);
  const DescriptorStats stats = estimate_stats(rows);

  switch (cfg.variant) {
    case WhiteningVariant::supervised: {
      std::vector<IndexPair> chosen;
      if (pairs) {
        chosen.assign(pairs->begin(), pairs->end());
      } else {
        if (labels.size() != train.size()) throw InputFormatError("label count does not match descriptor count");
        for (const auto& pr : matching_pairs(labels.labels, 0)) {
          if (!train.degenerate.empty() && (train.degenerate[pr.first] || train.degenerate[pr.second])) continue;
          chosen.push_back(pr);
        }
        if (cfg.max_pairs > 0 && chosen.size() > cfg.max_pairs) {
          Rng rng(cfg.seed);
          for (std::size_t k = 0; k < cfg.max_pairs; ++k) std::swap(chosen[k], chosen[k + rng.index(chosen.size() - k)]);
          chosen.resize(cfg.max_pairs);
        }
      }
      const IntraclassStats intra = intraclass_covariance(train.values, chosen);
      return fit_supervised(stats, intra, cfg.dim);
    }
    case WhiteningVariant::pca:
      return fit_pca_whitening(stats, cfg.dim);
    case WhiteningVariant::attenuated:
      return fit_attenuated(stats, cfg.t, cfg.dim);
    case WhiteningVariant::shrinkage:
      return fit_shrinkage(stats, cfg.shrink_index, cfg.dim);
    case WhiteningVariant::pca_sqrt:
      return fit_pca_sqrt(stats, cfg.dim);
  }
  throw std::invalid_argument("unknown whitening variant");
}

SweepResult sweep_shrinkage(const DescriptorSet& train, const DescriptorSet& test, const PatchLabels& test_labels,
                            WhiteningVariant variant, std::span<const double> grid, int dim,
                            const VerificationOptions& o) {
  if (grid.empty()) throw std::invalid_argument("shrinkage sweep needs a non-empty grid");
  if (variant != WhiteningVariant::attenuated && variant != WhiteningVariant::shrinkage) {
    throw std::invalid_argument("shrinkage sweep runs over wua or wus");
  }
  check_labels(test, test_labels);
  const PairSample sample = sample_pairs(test_labels.labels, o.positives, o.negatives, o.seed);
  const bool by_t = variant == WhiteningVariant::attenuated;

  SweepResult out;
  out.summary.protocol = "shrink-sweep";
  out.summary.config = set_echo(test, {{"whitening", std::string(to_string(variant))},
                                       {"whitening_dim", std::to_string(dim)},
                                       {"seed", std::to_string(o.seed)}});
  out.summary.curve_columns = {by_t ? "t" : "shrink_index", "fpr95", "map"};

  WhiteningConfig cfg;
  cfg.variant = variant;
  cfg.dim = dim;
  double best = std::numeric_limits<double>::infinity();
  double best_at = grid.front();
  for (double g : grid) {
    if (by_t) {
      cfg.t = g;
    } else {
      if (g < 1 || g != static_cast<double>(static_cast<int>(g))) {
        throw std::invalid_argument("shrinkage indices must be positive integers");
      }
      cfg.shrink_index = static_cast<int>(g);
    }
    const WhiteningModel model = fit_whitening(train, {}, cfg);
    const DescriptorSet white = apply(model, test);
    EvalReport r = eval_verification_pairs(white, sample, o.recall, echo(cfg));
    r.protocol = "shrink-sweep";
    const double f = r.metric("fpr95");
    out.summary.curve.push_back({g, f, r.metric("map")});
    if (f < best) {
      best = f;
      best_at = g;
    }
    out.points.push_back(std::move(r));
  }
  out.summary.set_metric("best_fpr95", best);
  out.summary.set_metric(by_t ? "best_t" : "best_shrink_index", best_at);
  return out;
}

SweepResult sweep_synthetic(const LabeledPatchSet& set, std::span<const SyntheticTransform> grid,
                            std::span<const SynthConfig> configs, const DescriptorExtractor& extractor,
                            const VerificationOptions& o) {
  if (grid.empty()) throw std::invalid_argument("synthetic sweep needs a non-empty grid");
  if (configs.empty()) throw std::invalid_argument("synthetic sweep needs at least one config");
  for (const auto& tr : grid) {
    if (!tr.in_range()) throw std::invalid_argument("synthetic transform outside the supported range");
  }
  const PairSample sample = sample_pairs(set.labels, o.positives, o.negatives, o.seed);
  const CombineMode mode = extractor.config().combine;

  // Pair k compares row k of `first` with row k of `second`; the scored set
  // stacks them so pair k is rows (k, n + k).
  const std::size_t n = sample.size();
  std::vector<Patch> firsts;
  firsts.reserve(n);
  for (const auto& pr : sample.pairs) firsts.push_back(set.patches[pr.first]);
  const std::vector<RawBlocks> first_blocks = aggregate_all(extractor, firsts);

  PairSample stacked;
  stacked.is_match = sample.is_match;
  for (std::size_t k = 0; k < n; ++k) stacked.pairs.emplace_back(k, n + k);

  SweepResult out;
  out.summary.protocol = "synth-sweep";
  out.summary.config = {{"count", std::to_string(set.size())}, {"seed", std::to_string(o.seed)},
                        {"recall", fmt_short(o.recall)}};
  out.summary.curve_columns = {"kind", "amount"};
  for (const auto& c : configs) out.summary.curve_columns.push_back("fpr95_" + c.name);

  for (const auto& tr : grid) {
    // Transform each distinct second patch once.
    std::map<std::size_t, std::size_t> slot;
    std::vector<Patch> moved;
    for (const auto& pr : sample.pairs) {
      if (slot.emplace(pr.second, moved.size()).second) moved.push_back(set.patches[pr.second]);
    }
    const auto count = static_cast<std::ptrdiff_t>(moved.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < count; ++i) moved[i] = apply_synthetic_transform(moved[i], tr);
    const std::vector<RawBlocks> moved_blocks = aggregate_all(extractor, moved);

    std::vector<RawBlocks> blocks(first_blocks);
    blocks.reserve(2 * n);
    for (const auto& pr : sample.pairs) blocks.push_back(moved_blocks[slot[pr.second]]);

    const bool rot = tr.kind == SyntheticTransform::Kind::rotation;
    const double amount = rot ? tr.degrees : std::hypot(tr.dx, tr.dy);
    EvalReport point;
    point.protocol = "synth-sweep";
    point.config = {{"transform", rot ? "rotation" : "translation"}, {"amount", fmt_short(amount)}};
    std::vector<double> row{rot ? 0.0 : 1.0, amount};
    for (const auto& c : configs) {
      DescriptorSet ds = assemble_set(blocks, c.variant, mode);
      if (c.model) ds = apply(*c.model, ds);
      const auto scores = score_pairs(ds, stacked.pairs);
      const double f = fpr_at_recall(scores, stacked.is_match, o.recall);
      point.set_metric("fpr95_" + c.name, f);
      row.push_back(f);
    }
    out.summary.curve.push_back(std::move(row));
    out.points.push_back(std::move(point));
  }
  return out;
}

}  // namespace kpd::bench
