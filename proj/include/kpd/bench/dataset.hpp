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
#include <string>
#include <vector>

#include "kpd/patch.hpp"

namespace kpd::bench {

inline constexpr int kPhototourismPatchSize = 64;
inline constexpr int kHPatchesPatchSize = 65;

/// Per-patch metadata. `label` identifies the physical point (3D point id for
/// Phototourism, a (sequence, row) id for HPatches); `group` is the sequence
/// index and `view` the image index within it (0 = reference), both zero for
/// sources without sequences.
struct PatchLabels {
  std::vector<std::int64_t> labels;
  std::vector<int> groups;
  std::vector<int> views;

  std::size_t size() const { return labels.size(); }
};

struct LabeledPatchSet {
  std::vector<Patch> patches;
  std::vector<std::int64_t> labels;
  std::vector<int> groups;
  std::vector<int> views;
  std::string source;

  std::size_t size() const { return patches.size(); }
  PatchLabels meta() const { return {labels, groups, views}; }
  // Non-negative labels, uniform patch size, metadata arrays of equal length.
  void validate() const;
};

/// Released Phototourism layout: patch*.bmp mosaics of 64x64 patches read
/// row-major, plus info.txt whose k-th non-empty line starts with the 3D point
/// id of patch k. Throws InputFormatError for a missing info file, mosaic
/// sizes that are not multiples of 64, or a patch count that disagrees with
/// the mosaics (too few slots, or a trailing mosaic left unused).
LabeledPatchSet ingest_phototourism(const std::filesystem::path& directory);

struct PatchSequence {
  std::string name;
  std::vector<std::string> view_names;      // "ref" first
  std::vector<std::vector<Patch>> views;    // views[v][row]

  std::size_t rows() const { return views.empty() ? 0 : views.front().size(); }
};

struct SequenceCollection {
  std::vector<PatchSequence> sequences;

  std::size_t patch_count() const;
  // Label = running (sequence, row) id, group = sequence, view = image index.
  LabeledPatchSet flatten() const;
};

/// Released HPatches layout: one directory per sequence with ref.png and the
/// transformed stacks (e1..e5, h1..h5, t1..t5 in name order), each a vertical
/// stack of 65x65 patches. `directory` may be a single sequence or a parent
/// of sequence directories. Throws InputFormatError for a missing ref.png, a
/// height that is not a multiple of 65, or stacks of unequal length.
SequenceCollection ingest_hpatches(const std::filesystem::path& directory);

/// Native layout: 8-bit grayscale PGM patches plus labels.csv with
/// "filename,label" lines (optional header), read in labels.csv order.
LabeledPatchSet ingest_raw(const std::filesystem::path& directory);
void write_raw(const std::filesystem::path& directory, const LabeledPatchSet& set);

// Label sidecar written next to descriptor files: CSV with header
// "index,label,group,view", one row per descriptor.
void write_labels(const std::filesystem::path& path, const PatchLabels& labels);
PatchLabels read_labels(const std::filesystem::path& path);

}  // namespace kpd::bench
