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

#include "kpd/bench/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "kpd/error.hpp"

namespace fs = std::filesystem;

namespace kpd::bench {

void LabeledPatchSet::validate() const {
  if (labels.size() != patches.size() || groups.size() != patches.size() || views.size() != patches.size()) {
    throw InputFormatError("patch metadata arrays differ in length");
  }
  for (auto l : labels) {
    if (l < 0) throw InputFormatError("patch labels must be non-negative");
  }
  for (const Patch& p : patches) {
    if (p.width() != patches.front().width()) throw InputFormatError("patches must share one size");
  }
}

namespace {

cv::Mat read_gray(const fs::path& path) {
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (img.empty()) throw InputFormatError("cannot decode image " + path.string());
  if (img.depth() != CV_8U) img.convertTo(img, CV_8U);
  return img;
}

Patch crop(const cv::Mat& img, int x0, int y0, int size) {
  std::vector<double> values(static_cast<std::size_t>(size) * size);
  for (int y = 0; y < size; ++y) {
    const auto* row = img.ptr<unsigned char>(y0 + y);
    for (int x = 0; x < size; ++x) values[static_cast<std::size_t>(y) * size + x] = row[x0 + x] / 255.0;
  }
  return Patch(size, std::move(values));
}

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return e;
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& ext) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && lower_ext(entry.path()) == ext) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void require_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputFormatError("not a directory: " + dir.string());
}

}  // namespace

LabeledPatchSet ingest_phototourism(const fs::path& directory) {
  require_directory(directory);
  const fs::path info_path = directory / "info.txt";
  std::ifstream info(info_path);
  if (!info) throw InputFormatError("missing info.txt in " + directory.string());

  std::vector<std::int64_t> labels;
  std::string line;
  while (std::getline(info, line)) {
    std::istringstream ls(line);
    std::int64_t id = 0;
    if (!(ls >> id)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw InputFormatError("malformed info.txt line: " + line);
    }
    labels.push_back(id);
  }

  std::vector<fs::path> mosaics;
  for (const auto& p : sorted_files(directory, ".bmp")) {
    if (p.filename().string().starts_with("patch")) mosaics.push_back(p);
  }
  if (mosaics.empty()) throw InputFormatError("no patch*.bmp mosaics in " + directory.string());

  constexpr int s = kPhototourismPatchSize;
  LabeledPatchSet set;
  set.source = "phototourism:" + directory.filename().string();
  std::size_t slots_before_last = 0;
  for (std::size_t k = 0; k < mosaics.size(); ++k) {
    const cv::Mat img = read_gray(mosaics[k]);
    if (img.cols % s != 0 || img.rows % s != 0) {
      throw InputFormatError("mosaic " + mosaics[k].filename().string() + " is not a multiple of 64 pixels");
    }
    const int per_row = img.cols / s;
    const int rows = img.rows / s;
    if (k + 1 == mosaics.size()) slots_before_last = set.patches.size();
    for (int r = 0; r < rows && set.patches.size() < labels.size(); ++r) {
      for (int c = 0; c < per_row && set.patches.size() < labels.size(); ++c) {
        set.patches.push_back(crop(img, c * s, r * s, s));
      }
    }
  }
  if (set.patches.size() < labels.size()) {
    throw InputFormatError("info.txt lists " + std::to_string(labels.size()) + " patches but the mosaics hold " +
                           std::to_string(set.patches.size()));
  }
  if (mosaics.size() > 1 && slots_before_last >= labels.size()) {
    throw InputFormatError("info.txt lists fewer patches than the mosaics contain");
  }
  set.labels = std::move(labels);
  set.groups.assign(set.patches.size(), 0);
  set.views.assign(set.patches.size(), 0);
  set.validate();
  return set;
}

std::size_t SequenceCollection::patch_count() const {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.rows() * s.views.size();
  return n;
}

LabeledPatchSet SequenceCollection::flatten() const {
  LabeledPatchSet set;
  set.source = "hpatches";
  std::int64_t base = 0;
  for (std::size_t g = 0; g < sequences.size(); ++g) {
    const auto& seq = sequences[g];
    for (std::size_t v = 0; v < seq.views.size(); ++v) {
      for (std::size_t r = 0; r < seq.views[v].size(); ++r) {
        set.patches.push_back(seq.views[v][r]);
        set.labels.push_back(base + static_cast<std::int64_t>(r));
        set.groups.push_back(static_cast<int>(g));
        set.views.push_back(static_cast<int>(v));
      }
    }
    base += static_cast<std::int64_t>(seq.rows());
  }
  return set;
}

namespace {

std::vector<Patch> read_stack(const fs::path& path) {
  constexpr int s = kHPatchesPatchSize;
  const cv::Mat img = read_gray(path);
  if (img.cols != s) throw InputFormatError(path.string() + ": stack width must be 65");
  if (img.rows % s != 0) throw InputFormatError(path.string() + ": stack height is not a multiple of 65");
  std::vector<Patch> out;
  for (int r = 0; r < img.rows / s; ++r) out.push_back(crop(img, 0, r * s, s));
  return out;
}

PatchSequence read_sequence(const fs::path& dir) {
  const fs::path ref = dir / "ref.png";
  if (!fs::is_regular_file(ref)) throw InputFormatError("missing reference file " + ref.string());
  PatchSequence seq;
  seq.name = dir.filename().string();
  seq.view_names.push_back("ref");
  seq.views.push_back(read_stack(ref));
  for (const auto& p : sorted_files(dir, ".png")) {
    if (p.filename() == "ref.png") continue;
    auto stack = read_stack(p);
    if (stack.size() != seq.views.front().size()) {
      throw InputFormatError(p.string() + ": patch count differs from ref.png");
    }
    seq.view_names.push_back(p.stem().string());
    seq.views.push_back(std::move(stack));
  }
  return seq;
}

}  // namespace

SequenceCollection ingest_hpatches(const fs::path& directory) {
  require_directory(directory);
  SequenceCollection out;
  if (fs::exists(directory / "ref.png")) {
    out.sequences.push_back(read_sequence(directory));
    return out;
  }
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw InputFormatError("no HPatches sequences in " + directory.string());
  for (const auto& d : dirs) out.sequences.push_back(read_sequence(d));
  return out;
}

LabeledPatchSet ingest_raw(const fs::path& directory) {
  require_directory(directory);
  std::ifstream in(directory / "labels.csv");
  if (!in) throw InputFormatError("missing labels.csv in " + directory.string());
  LabeledPatchSet set;
  set.source = "raw:" + directory.filename().string();
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InputFormatError("malformed labels.csv line: " + line);
    const std::string name = line.substr(0, comma);
    const std::string label = line.substr(comma + 1);
    if (first && name == "filename") {
      first = false;
      continue;
    }
    first = false;
    std::int64_t id = 0;
    try {
      std::size_t used = 0;
      id = std::stoll(label, &used);
      if (used != label.size()) throw std::invalid_argument(label);
    } catch (const std::exception&) {
      throw InputFormatError("malformed label in labels.csv: " + line);
    }
    const cv::Mat img = read_gray(directory / name);
    if (img.cols != img.rows) throw InputFormatError(name + ": patch is not square");
    set.patches.push_back(crop(img, 0, 0, img.cols));
    set.labels.push_back(id);
  }
  if (set.patches.empty()) throw InputFormatError("labels.csv lists no patches");
  set.groups.assign(set.patches.size(), 0);
  set.views.assign(set.patches.size(), 0);
  set.validate();
  return set;
}

void write_raw(const fs::path& directory, const LabeledPatchSet& set) {
  fs::create_directories(directory);
  std::ofstream labels(directory / "labels.csv");
  if (!labels) throw InputFormatError("cannot write labels.csv in " + directory.string());
  labels << "filename,label\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Patch& p = set.patches[i];
    cv::Mat img(p.width(), p.width(), CV_8U);
    for (int y = 0; y < p.width(); ++y) {
      for (int x = 0; x < p.width(); ++x) {
        img.at<unsigned char>(y, x) = cv::saturate_cast<unsigned char>(p.at(x + 1, y + 1) * 255.0);
      }
    }
    char name[32];
    std::snprintf(name, sizeof(name), "patch%06zu.pgm", i);
    if (!cv::imwrite((directory / name).string(), img)) throw InputFormatError("cannot write patch image");
    labels << name << ',' << set.labels[i] << '\n';
  }
}

void write_labels(const fs::path& path, const PatchLabels& labels) {
  std::ofstream out(path);
  if (!out) throw InputFormatError("cannot write " + path.string());
  out << "index,label,group,view\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << i << ',' << labels.labels[i] << ',' << (i < labels.groups.size() ? labels.groups[i] : 0) << ','
        << (i < labels.views.size() ? labels.views[i] : 0) << '\n';
  }
}

PatchLabels read_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputFormatError("cannot open labels file " + path.string());
  PatchLabels out;
  std::string line;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.starts_with("index")) continue;
    std::istringstream ls(line);
    std::size_t index = 0;
    std::int64_t label = 0;
    int group = 0, view = 0;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(ls >> index >> c1 >> label >> c2 >> group >> c3 >> view) || c1 != ',' || c2 != ',' || c3 != ',') {
      throw InputFormatError("malformed labels line: " + line);
    }
    if (index != expected++) throw InputFormatError("labels file indices must be consecutive from 0");
    out.labels.push_back(label);
    out.groups.push_back(group);
    out.views.push_back(view);
  }
  return out;
}

}  // namespace kpd::bench
