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

#include "kpd/bench/dataset.hpp"

namespace kpd::bench {

/// Parameters of a procedurally generated labeled patch set.
///
/// Each point is a random planar scene made of smooth blobs, step edges and
/// ridges. A view of the point samples the scene through a jittered
/// similarity transform (detector orientation, position and scale error),
/// then applies a random gain/offset and additive pixel noise. Views of the
/// same point share a label, as patches of one 3D point do in Phototourism.
struct SyntheticSetOptions {
  int points = 600;
  int views = 4;
  int width = 64;
  std::uint64_t seed = 1;
  int components = 10;
  double rotation_sigma_deg = 8.0;
  double translation_sigma_px = 1.8;
  double scale_sigma = 0.12;
  double gain_spread = 0.25;
  double offset_spread = 0.08;
  double noise_sigma = 0.05;
  std::int64_t first_label = 0;
};

LabeledPatchSet make_synthetic_set(const SyntheticSetOptions& options);

}  // namespace kpd::bench
