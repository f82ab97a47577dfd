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
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kpd/feature_maps.hpp"
#include "kpd/patch.hpp"

namespace kpd {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Numeric values are the variant codes of the KPDC container.
enum class Variant : std::uint8_t { polar = 0, cartesian = 1, combined = 2, postprocessed = 3 };

std::string_view to_string(Variant v);
// Accepts polar | cartesian | combined | postprocessed.
Variant parse_variant(std::string_view name);

// raw_concat: concatenate the unnormalized polar and Cartesian aggregates and
// normalize once, so the combined similarity is the sum of the two match
// kernels. block_normalized: normalize each block first, then renormalize.
enum class CombineMode { raw_concat, block_normalized };

struct DescriptorConfig {
  AttributeKernelConfig phi{8.0, 2, EmbeddingDomain::full_period};
  AttributeKernelConfig rho{8.0, 2, EmbeddingDomain::half_period};
  AttributeKernelConfig theta_rel{8.0, 3, EmbeddingDomain::full_period};
  AttributeKernelConfig x{1.0, 1, EmbeddingDomain::half_period};
  AttributeKernelConfig y{1.0, 1, EmbeddingDomain::half_period};
  AttributeKernelConfig theta{8.0, 3, EmbeddingDomain::full_period};
  CombineMode combine = CombineMode::raw_concat;

  int polar_dim() const { return phi.dim() * rho.dim() * theta_rel.dim(); }
  int cartesian_dim() const { return x.dim() * y.dim() * theta.dim(); }
  // Throws for Variant::postprocessed, whose size is set by the whitening model.
  int dim(Variant v) const;
};

/// Coefficient tables and feature maps for every attribute of a config.
struct DescriptorKernels {
  explicit DescriptorKernels(const DescriptorConfig& cfg = {});

  DescriptorConfig config;
  FourierCoeffs phi_coeffs, rho_coeffs, theta_rel_coeffs, x_coeffs, y_coeffs, theta_coeffs;
  FeatureMap phi, rho, theta_rel, x, y, theta;
};

struct Descriptor {
  Variant variant = Variant::polar;
  std::vector<double> values;
  bool degenerate = false;  // zero-gradient patch, values are all zero

  int dim() const { return static_cast<int>(values.size()); }
};

/// Scales to unit l2 norm; the zero vector stays zero.
Descriptor normalize(Descriptor d);
void normalize_in_place(std::span<double> values);

// Kronecker layouts, fastest index last:
//   polar     [i_phi][i_rho][i_theta_rel]
//   cartesian [i_x][i_y][i_theta]
// rho maps as rho * pi; x and y map as (c - 1) / (W - 1) * pi.
void polar_embedding(const PixelAttributes& p, const DescriptorKernels& k, std::span<double> out);
void cartesian_embedding(const PixelAttributes& p, int width, const DescriptorKernels& k,
                         std::span<double> out);

/// Unnormalized per-parametrization aggregates sum_p g sqrt(m) psi(p).
struct RawBlocks {
  std::vector<double> polar;
  std::vector<double> cartesian;
  bool degenerate = false;
};

/// Builds the final normalized descriptor of one variant from raw blocks.
Descriptor assemble(const RawBlocks& blocks, Variant variant, CombineMode mode);

// Reference path: explicit attribute tuples, one embedding per pixel.
RawBlocks aggregate_reference(const Patch& patch, const DescriptorKernels& kernels);
Descriptor describe_polar(const Patch& patch, const DescriptorConfig& cfg = {});
Descriptor describe_cartesian(const Patch& patch, const DescriptorConfig& cfg = {});
Descriptor describe_combined(const Patch& patch, const DescriptorConfig& cfg = {});

/// Production extraction path.
///
/// Position-only factors (g, polar and Cartesian spatial embeddings, cos/sin
/// of phi) are tabulated once per patch width; per pixel only the gradient
/// and the two orientation embeddings are evaluated, without trigonometric
/// calls. Thread-safe: the width cache is guarded and entries are immutable.
class DescriptorExtractor {
 public:
  explicit DescriptorExtractor(const DescriptorConfig& cfg = {});
  ~DescriptorExtractor();

  DescriptorExtractor(const DescriptorExtractor&) = delete;
  DescriptorExtractor& operator=(const DescriptorExtractor&) = delete;

  const DescriptorKernels& kernels() const { return kernels_; }
  const DescriptorConfig& config() const { return kernels_.config; }
  int dim(Variant v) const { return kernels_.config.dim(v); }

  RawBlocks aggregate(const Patch& patch) const;
  Descriptor describe(const Patch& patch, Variant variant) const;

  // Forces the tables for one width to exist (used before parallel loops).
  void prepare(int width) const;

 private:
  struct Geometry;
  std::shared_ptr<const Geometry> geometry(int width) const;

  DescriptorKernels kernels_;
  mutable std::mutex cache_mutex_;
  mutable std::map<int, std::shared_ptr<const Geometry>> cache_;
};

/// A batch of descriptors, one per row.
struct DescriptorSet {
  Variant variant = Variant::polar;
  RowMatrix values;
  std::vector<std::uint8_t> degenerate;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
  int dim() const { return static_cast<int>(values.cols()); }
};

// Batch extraction. All three produce the same descriptors; the serial and
// parallel versions are bit-identical, the reference agrees to round-off.
DescriptorSet extract_reference(std::span<const Patch> patches, Variant variant,
                                const DescriptorConfig& cfg = {});
DescriptorSet extract_serial(const DescriptorExtractor& extractor, std::span<const Patch> patches,
                             Variant variant);
// threads <= 0 keeps the OpenMP default.
DescriptorSet extract_parallel(const DescriptorExtractor& extractor, std::span<const Patch> patches,
                               Variant variant, int threads = 0);

}  // namespace kpd
