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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kpd/descriptor.hpp"
#include "kpd/whitening.hpp"

namespace kpd {

/// Per-pixel feature map psi(p) of one parametrization (polar, cartesian, or
/// their concatenation for combined). With `weighted`, scaled by g sqrt(m).
std::vector<double> pixel_embedding(const PixelAttributes& p, int width, Variant parametrization,
                                    const DescriptorKernels& kernels, bool weighted);

/// M(p, q) ~ psi(p) . psi(q).
double pixel_similarity(const PixelAttributes& p, const PixelAttributes& q, int width, Variant parametrization,
                        const DescriptorKernels& kernels, bool weighted = false);

/// (psi(p) - mu)^T A A^T (psi(q) - mu) without the constant mu^T A A^T mu.
/// Throws std::invalid_argument for the non-linear pca_sqrt model or when the
/// model input dimension does not match the parametrization.
double whitened_pixel_similarity(const PixelAttributes& p, const PixelAttributes& q, int width,
                                 Variant parametrization, const DescriptorKernels& kernels,
                                 const WhiteningModel& model, bool weighted = false);

struct Probe {
  int x = 1;
  int y = 1;
  double theta = 0.0;
};

/// Similarity of one probe pixel to every grid position at a constant
/// gradient angle q_theta. Both sides use m = 1 and their Gaussian weight g.
struct PatchMap {
  int width = 0;
  Variant parametrization = Variant::polar;
  Probe probe;
  double q_theta = 0.0;
  bool whitened = false;
  std::vector<double> values;  // row-major, y outer

  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y - 1) * width + static_cast<std::size_t>(x - 1)];
  }
};

/// Throws std::out_of_range when the probe lies outside the patch.
PatchMap patch_map(const Probe& probe, double q_theta, int width, Variant parametrization,
                   const DescriptorKernels& kernels, const WhiteningModel* model = nullptr);

enum class SliceAxis {
  row,     // fixed y = index, values along x
  column,  // fixed x = index, values along y
};

std::vector<double> slice_1d(const PatchMap& map, SliceAxis axis, int index);

/// Pixel contribution maps for a patch pair using real attributes:
/// on_p[p] = sum_q M(p, q) over Q, on_q[q] = sum_p M(p, q) over P.
struct HeatMaps {
  int width = 0;
  std::vector<double> on_p;
  std::vector<double> on_q;
};

HeatMaps pair_heat_map(const Patch& p, const Patch& q, Variant parametrization, const DescriptorKernels& kernels,
                       const WhiteningModel* model = nullptr);

struct SimilarityHistograms {
  double lo = -1.0;
  double hi = 1.0;
  std::vector<std::size_t> positive;
  std::vector<std::size_t> negative;

  int bins() const { return static_cast<int>(positive.size()); }
  // Intersection area of the two count-normalized histograms, in [0, 1].
  double overlap() const;
};

/// Bins similarity scores over [lo, hi]; values outside are clamped into the
/// end bins. Throws std::invalid_argument for empty inputs or bins < 1.
SimilarityHistograms similarity_histograms(std::span<const double> positive, std::span<const double> negative,
                                           int bins, double lo = -1.0, double hi = 1.0);

// Exports. CSV rows are patch rows, values printed with 17 significant
// digits. PGM is binary P5 with per-map min-max scaling to 0..255.
void write_map_csv(const std::filesystem::path& path, std::span<const double> values, int width);
void write_map_pgm(const std::filesystem::path& path, std::span<const double> values, int width);
void write_vector_csv(const std::filesystem::path& path, std::span<const double> values);

/// "map_<px>_<py>_<ptheta mrad>_<qtheta mrad>" with angles rounded to integer milliradians.
std::string map_file_stem(const PatchMap& map);

}  // namespace kpd
