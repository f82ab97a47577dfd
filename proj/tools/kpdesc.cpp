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

// kpdesc: command-line front end for extraction, whitening, evaluation,
// sweeps and pixel-level analysis.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kpd/analysis.hpp"
#include "kpd/bench/dataset.hpp"
#include "kpd/bench/metrics.hpp"
#include "kpd/bench/protocols.hpp"
#include "kpd/bench/synthetic.hpp"
#include "kpd/container.hpp"
#include "kpd/descriptor.hpp"
#include "kpd/error.hpp"
#include "kpd/whitening.hpp"

namespace fs = std::filesystem;
using namespace kpd;
using namespace kpd::bench;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

fs::path sidecar(const fs::path& desc) {
  fs::path p = desc;
  p.replace_extension(".labels.csv");
  return p;
}

LabeledPatchSet load_set(const fs::path& dir, const std::string& format) {
  if (format == "pt") return ingest_phototourism(dir);
  if (format == "hpatches") return ingest_hpatches(dir).flatten();
  if (format == "raw") return ingest_raw(dir);
  throw InputFormatError("unknown input format " + format + " (expected pt, hpatches or raw)");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputFormatError("bad number in list: " + item);
    }
  }
  return out;
}

std::vector<IndexPair> read_pairs(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputFormatError("cannot open pairs file " + path.string());
  std::vector<IndexPair> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::size_t a = 0, b = 0;
    char comma = 0;
    if (!(ls >> a >> comma >> b) || comma != ',') throw InputFormatError("malformed pairs line: " + line);
    out.emplace_back(a, b);
  }
  return out;
}

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

struct Options {
  // extract
  std::string input, format = "pt", variant = "combined", out;
  int threads = 0;
  // whiten
  std::string desc, labels, pairs, wvariant = "ws", model;
  double t = kDefaultAttenuation;
  int beta_index = kDefaultShrinkIndex;
  int dim = kDefaultOutputDim;
  // eval
  double recall = 0.95;
  std::size_t pairs_pos = 5000, pairs_neg = 5000, distractors = 100;
  std::uint64_t seed = 1;
  // sweep
  std::string train, test, test_labels, grid = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  std::string train_input, train_format, rotations = "0,10,20,30", translations = "0,4,8,12";
  // analyze
  int px = 32, py = 32, width = 64, index = 32, pi = 0, qi = 1, bins = 50;
  double p_theta_deg = 0.0, q_theta_deg = 0.0;
  std::string axis = "row", parametrization = "polar";
  // generate
  int points = 600, views = 4;
};

int run_extract(const Options& o) {
  const LabeledPatchSet set = load_set(o.input, o.format);
  const Variant v = parse_variant(o.variant);
  const DescriptorExtractor extractor;
  const DescriptorSet ds = extract_parallel(extractor, set.patches, v, o.threads);
  write_descriptors(fs::path(o.out), ds);
  write_labels(sidecar(o.out), set.meta());
  std::size_t degenerate = 0;
  for (auto d : ds.degenerate) degenerate += d;
  std::printf("%zu descriptors of dim %d (%zu degenerate) -> %s\n", ds.size(), ds.dim(), degenerate, o.out.c_str());
  return 0;
}

int run_whiten_fit(const Options& o) {
  const DescriptorSet ds = read_descriptors(fs::path(o.desc));
  WhiteningConfig cfg;
  cfg.variant = parse_whitening_variant(o.wvariant);
  cfg.t = o.t;
  cfg.shrink_index = o.beta_index;
  cfg.dim = o.dim;
  cfg.seed = o.seed;
  WhiteningModel model;
  if (!o.pairs.empty()) {
    const auto pairs = read_pairs(o.pairs);
    for (const auto& [a, b] : pairs) {
      if (a >= ds.size() || b >= ds.size()) throw InputFormatError("pair index beyond the descriptor count");
    }
    model = fit_whitening(ds, {}, cfg, std::span<const IndexPair>(pairs));
  } else {
    PatchLabels labels;
    if (cfg.variant == WhiteningVariant::supervised) {
      labels = read_labels(o.labels.empty() ? sidecar(o.desc) : fs::path(o.labels));
    }
    model = fit_whitening(ds, labels, cfg);
  }
  write_model(fs::path(o.out), model);
  std::printf("%s model %d -> %d -> %s\n", std::string(to_string(model.variant)).c_str(), model.input_dim(),
              model.output_dim(), o.out.c_str());
  return 0;
}

int run_whiten_apply(const Options& o) {
  const DescriptorSet ds = read_descriptors(fs::path(o.desc));
  const WhiteningModel model = read_model(fs::path(o.model));
  write_descriptors(fs::path(o.out), apply(model, ds));
  const fs::path labels = sidecar(o.desc);
  if (fs::exists(labels)) fs::copy_file(labels, sidecar(o.out), fs::copy_options::overwrite_existing);
  std::printf("%zu descriptors whitened to dim %d -> %s\n", ds.size(), model.output_dim(), o.out.c_str());
  return 0;
}

void emit(const EvalReport& r, const std::string& out) {
  if (out.empty()) {
    std::fputs(r.to_text().c_str(), stdout);
  } else {
    r.write(out);
    std::fputs(r.to_text().c_str(), stdout);
  }
}

int run_eval(const Options& o, const std::string& which) {
  const DescriptorSet ds = read_descriptors(fs::path(o.desc));
  const PatchLabels labels = read_labels(o.labels.empty() ? sidecar(o.desc) : fs::path(o.labels));
  if (which == "verify") {
    emit(eval_verification(ds, labels, {o.pairs_pos, o.pairs_neg, o.recall, o.seed}), o.out);
  } else if (which == "retrieval") {
    emit(eval_retrieval(ds, labels, {o.distractors, o.seed}), o.out);
  } else {
    emit(eval_matching(ds, labels), o.out);
  }
  return 0;
}

int run_sweep_shrink(const Options& o) {
  const DescriptorSet train = read_descriptors(fs::path(o.train));
  const DescriptorSet test = read_descriptors(fs::path(o.test));
  const PatchLabels labels = read_labels(o.test_labels.empty() ? sidecar(o.test) : fs::path(o.test_labels));
  const auto grid = parse_list(o.grid);
  const SweepResult res = sweep_shrinkage(train, test, labels, parse_whitening_variant(o.wvariant), grid, o.dim,
                                          {o.pairs_pos, o.pairs_neg, o.recall, o.seed});
  emit(res.summary, o.out);
  std::fputs(res.summary.curve_csv().c_str(), stdout);
  return 0;
}

int run_sweep_synth(const Options& o) {
  const LabeledPatchSet set = load_set(o.input, o.format);
  const LabeledPatchSet train =
      o.train_input.empty() ? set : load_set(o.train_input, o.train_format.empty() ? o.format : o.train_format);
  const DescriptorExtractor extractor;
  const auto blocks = aggregate_all(extractor, train.patches, o.threads);
  const PatchLabels meta = train.meta();
  const CombineMode mode = extractor.config().combine;
  // The Cartesian block has only 63 dimensions; --dim is capped per config.
  const auto fit_ws = [&](Variant v) {
    const DescriptorSet ds = assemble_set(blocks, v, mode);
    WhiteningConfig cfg;
    cfg.dim = std::min(o.dim, ds.dim());
    cfg.seed = o.seed;
    return fit_whitening(ds, meta, cfg);
  };
  const WhiteningModel mp = fit_ws(Variant::polar);
  const WhiteningModel mc = fit_ws(Variant::cartesian);
  const WhiteningModel mpc = fit_ws(Variant::combined);
  const std::vector<SynthConfig> configs{
      {"P+W_S", Variant::polar, &mp}, {"C+W_S", Variant::cartesian, &mc}, {"PC+W_S", Variant::combined, &mpc}};

  std::vector<SyntheticTransform> grid;
  for (double d : parse_list(o.rotations)) grid.push_back(SyntheticTransform::rotation(d));
  for (double s : parse_list(o.translations)) {
    if (s != std::round(s)) throw InputFormatError("translations are whole pixels");
    grid.push_back(SyntheticTransform::translation(static_cast<int>(s)));
  }
  const SweepResult res = sweep_synthetic(set, grid, configs, extractor, {o.pairs_pos, o.pairs_neg, o.recall, o.seed});
  emit(res.summary, o.out);
  std::fputs(res.summary.curve_csv().c_str(), stdout);
  return 0;
}

const WhiteningModel* maybe_model(const std::string& path, WhiteningModel& storage) {
  if (path.empty()) return nullptr;
  storage = read_model(fs::path(path));
  return &storage;
}

int run_analyze(const Options& o, const std::string& which) {
  const DescriptorKernels kernels;
  const Variant param = parse_variant(o.parametrization);
  const fs::path out = o.out.empty() ? fs::path(".") : fs::path(o.out);
  fs::create_directories(out);
  WhiteningModel storage;
  const WhiteningModel* model = maybe_model(o.model, storage);

  if (which == "patchmap" || which == "slice") {
    const PatchMap map = patch_map({o.px, o.py, radians(o.p_theta_deg)}, radians(o.q_theta_deg), o.width, param,
                                   kernels, model);
    const std::string stem = map_file_stem(map);
    if (which == "patchmap") {
      write_map_csv(out / (stem + ".csv"), map.values, map.width);
      write_map_pgm(out / (stem + ".pgm"), map.values, map.width);
      std::printf("%s\n", (out / stem).c_str());
    } else {
      const SliceAxis axis = o.axis == "column" ? SliceAxis::column : SliceAxis::row;
      if (o.axis != "row" && o.axis != "column") throw InputFormatError("axis must be row or column");
      const auto values = slice_1d(map, axis, o.index);
      const fs::path file = out / (stem + "_" + o.axis + std::to_string(o.index) + ".csv");
      write_vector_csv(file, values);
      std::printf("%s\n", file.c_str());
    }
    return 0;
  }
  if (which == "heatmap") {
    const LabeledPatchSet set = load_set(o.input, o.format);
    if (o.pi < 0 || o.qi < 0 || static_cast<std::size_t>(o.pi) >= set.size() ||
        static_cast<std::size_t>(o.qi) >= set.size()) {
      throw InputFormatError("patch index out of range");
    }
    const HeatMaps h = pair_heat_map(set.patches[o.pi], set.patches[o.qi], param, kernels, model);
    const std::string stem = "heat_" + std::to_string(o.pi) + "_" + std::to_string(o.qi);
    write_map_csv(out / (stem + "_p.csv"), h.on_p, h.width);
    write_map_csv(out / (stem + "_q.csv"), h.on_q, h.width);
    write_map_pgm(out / (stem + "_p.pgm"), h.on_p, h.width);
    write_map_pgm(out / (stem + "_q.pgm"), h.on_q, h.width);
    std::printf("%s\n", (out / stem).c_str());
    return 0;
  }
  // hist
  const DescriptorSet ds = read_descriptors(fs::path(o.desc));
  const PatchLabels labels = read_labels(o.labels.empty() ? sidecar(o.desc) : fs::path(o.labels));
  if (labels.size() != ds.size()) throw InputFormatError("label count does not match descriptor count");
  const PairSample sample = sample_pairs(labels.labels, o.pairs_pos, o.pairs_neg, o.seed);
  const auto scores = score_pairs(ds, sample.pairs);
  std::vector<double> pos, neg;
  for (std::size_t k = 0; k < scores.size(); ++k) (sample.is_match[k] ? pos : neg).push_back(scores[k]);
  const SimilarityHistograms h = similarity_histograms(pos, neg, o.bins);
  const fs::path file = out / "similarity_hist.csv";
  std::ofstream csv(file);
  if (!csv) throw InputFormatError("cannot write " + file.string());
  csv << "bin_lo,bin_hi,positive,negative\n";
  const double step = (h.hi - h.lo) / h.bins();
  for (int b = 0; b < h.bins(); ++b) {
    csv << h.lo + b * step << ',' << h.lo + (b + 1) * step << ',' << h.positive[b] << ',' << h.negative[b] << '\n';
  }
  std::printf("overlap=%.6f -> %s\n", h.overlap(), file.c_str());
  return 0;
}

int run_generate(const Options& o) {
  SyntheticSetOptions so;
  so.points = o.points;
  so.views = o.views;
  so.width = o.width;
  so.seed = o.seed;
  write_raw(o.out, make_synthetic_set(so));
  std::printf("%d points x %d views -> %s\n", o.points, o.views, o.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kpdesc: kernelized local patch descriptors"};
  app.require_subcommand(1);
  Options o;

  auto* extract = app.add_subcommand("extract", "Extract descriptors from a patch dataset");
  extract->add_option("--input", o.input, "Dataset directory")->required();
  extract->add_option("--format", o.format, "pt | hpatches | raw");
  extract->add_option("--variant", o.variant, "polar | cartesian | combined");
  extract->add_option("--out", o.out, "Output .kpdc file")->required();
  extract->add_option("--threads", o.threads, "Worker threads (0 = default)");

  auto* whiten = app.add_subcommand("whiten", "Fit or apply whitening");
  whiten->require_subcommand(1);
  auto* fit = whiten->add_subcommand("fit", "Fit a whitening model");
  fit->add_option("--desc", o.desc, "Training descriptors")->required();
  fit->add_option("--labels", o.labels, "Label sidecar (default: next to --desc)");
  fit->add_option("--pairs", o.pairs, "Matching pairs as 'i,j' lines (supervised only)");
  fit->add_option("--variant", o.wvariant, "ws | w | wua | wus | pcasqrt");
  fit->add_option("--t", o.t, "Attenuation extent for wua");
  fit->add_option("--beta-index", o.beta_index, "Eigenvalue index for wus");
  fit->add_option("--dim", o.dim, "Output dimension");
  fit->add_option("--seed", o.seed, "Seed for pair subsampling");
  fit->add_option("--out", o.out, "Output .kpwm file")->required();
  auto* wapply = whiten->add_subcommand("apply", "Apply a whitening model");
  wapply->add_option("--desc", o.desc, "Input descriptors")->required();
  wapply->add_option("--model", o.model, "Model .kpwm")->required();
  wapply->add_option("--out", o.out, "Output .kpdc")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate descriptors");
  eval->require_subcommand(1);
  std::vector<std::pair<std::string, CLI::App*>> evals;
  for (const char* name : {"verify", "retrieval", "matching"}) {
    auto* sub = eval->add_subcommand(name, std::string(name) + " protocol");
    sub->add_option("--desc", o.desc, "Descriptors")->required();
    sub->add_option("--labels", o.labels, "Label sidecar (default: next to --desc)");
    sub->add_option("--recall", o.recall, "Recall for the FPR operating point");
    sub->add_option("--pairs-pos", o.pairs_pos, "Matching pairs to sample");
    sub->add_option("--pairs-neg", o.pairs_neg, "Non-matching pairs to sample");
    sub->add_option("--distractors", o.distractors, "Distractors per retrieval query");
    sub->add_option("--seed", o.seed, "Sampling seed");
    sub->add_option("--out", o.out, "Report file");
    evals.emplace_back(name, sub);
  }

  auto* sweep = app.add_subcommand("sweep", "Parameter and robustness sweeps");
  sweep->require_subcommand(1);
  auto* shrink = sweep->add_subcommand("shrink", "Sweep the unsupervised shrinkage parameter");
  shrink->add_option("--train", o.train, "Descriptors to fit on")->required();
  shrink->add_option("--test", o.test, "Descriptors to evaluate")->required();
  shrink->add_option("--test-labels", o.test_labels, "Labels of --test (default: sidecar)");
  shrink->add_option("--variant", o.wvariant, "wua (t grid) | wus (index grid)")->required();
  shrink->add_option("--grid", o.grid, "Comma-separated grid");
  shrink->add_option("--dim", o.dim, "Output dimension");
  shrink->add_option("--pairs-pos", o.pairs_pos, "Matching pairs to sample");
  shrink->add_option("--pairs-neg", o.pairs_neg, "Non-matching pairs to sample");
  shrink->add_option("--recall", o.recall, "Recall for the FPR operating point");
  shrink->add_option("--seed", o.seed, "Sampling seed");
  shrink->add_option("--out", o.out, "Report file");
  auto* synth = sweep->add_subcommand("synth", "FPR95 under synthetic rotation and translation");
  synth->add_option("--input", o.input, "Evaluation dataset")->required();
  synth->add_option("--format", o.format, "pt | hpatches | raw");
  synth->add_option("--train-input", o.train_input, "Dataset for fitting W_S (default: --input)");
  synth->add_option("--train-format", o.train_format, "Format of --train-input");
  synth->add_option("--rotations", o.rotations, "Degrees, comma-separated");
  synth->add_option("--translations", o.translations, "Pixels, comma-separated");
  synth->add_option("--dim", o.dim, "Whitened dimension");
  synth->add_option("--pairs-pos", o.pairs_pos, "Matching pairs to sample");
  synth->add_option("--pairs-neg", o.pairs_neg, "Non-matching pairs to sample");
  synth->add_option("--recall", o.recall, "Recall for the FPR operating point");
  synth->add_option("--seed", o.seed, "Sampling seed");
  synth->add_option("--threads", o.threads);
  synth->add_option("--out", o.out, "Report file");

  auto* analyze = app.add_subcommand("analyze", "Pixel-level similarity analysis");
  analyze->require_subcommand(1);
  std::vector<std::pair<std::string, CLI::App*>> analyses;
  for (const char* name : {"patchmap", "slice", "heatmap", "hist"}) {
    auto* sub = analyze->add_subcommand(name, std::string(name) + " export");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--model", o.model, "Whitening model (.kpwm)");
    sub->add_option("--parametrization", o.parametrization, "polar | cartesian | combined");
    analyses.emplace_back(name, sub);
  }
  for (int k = 0; k < 2; ++k) {
    auto* sub = analyses[k].second;
    sub->add_option("--x", o.px, "Probe column (1-based)");
    sub->add_option("--y", o.py, "Probe row (1-based)");
    sub->add_option("--theta", o.p_theta_deg, "Probe gradient angle, degrees");
    sub->add_option("--q-theta", o.q_theta_deg, "Map gradient angle, degrees");
    sub->add_option("--width", o.width, "Patch width");
  }
  analyses[1].second->add_option("--axis", o.axis, "row | column");
  analyses[1].second->add_option("--index", o.index, "Row or column index (1-based)");
  analyses[2].second->add_option("--input", o.input, "Dataset directory")->required();
  analyses[2].second->add_option("--format", o.format, "pt | hpatches | raw");
  analyses[2].second->add_option("--p", o.pi, "Index of patch P");
  analyses[2].second->add_option("--q", o.qi, "Index of patch Q");
  analyses[3].second->add_option("--desc", o.desc, "Descriptors")->required();
  analyses[3].second->add_option("--labels", o.labels, "Label sidecar");
  analyses[3].second->add_option("--bins", o.bins, "Histogram bins");
  analyses[3].second->add_option("--pairs-pos", o.pairs_pos, "Matching pairs to sample");
  analyses[3].second->add_option("--pairs-neg", o.pairs_neg, "Non-matching pairs to sample");
  analyses[3].second->add_option("--seed", o.seed, "Sampling seed");

  auto* generate = app.add_subcommand("generate", "Write a synthetic labeled patch set in raw format");
  generate->add_option("--out", o.out, "Output directory")->required();
  generate->add_option("--points", o.points, "3D points");
  generate->add_option("--views", o.views, "Views per point");
  generate->add_option("--width", o.width, "Patch width");
  generate->add_option("--seed", o.seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*extract) return run_extract(o);
    if (*fit) return run_whiten_fit(o);
    if (*wapply) return run_whiten_apply(o);
    for (const auto& [name, sub] : evals) {
      if (*sub) return run_eval(o, name);
    }
    if (*shrink) return run_sweep_shrink(o);
    if (*synth) return run_sweep_synth(o);
    for (const auto& [name, sub] : analyses) {
      if (*sub) return run_analyze(o, name);
    }
    if (*generate) return run_generate(o);
  } catch (const InputFormatError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInput;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return kExitInput;
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "out of range: %s\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
