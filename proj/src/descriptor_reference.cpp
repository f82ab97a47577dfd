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

#include <cmath>

#include "kpd/descriptor.hpp"

namespace kpd {

RawBlocks aggregate_reference(const Patch& patch, const DescriptorKernels& kernels) {
  const auto& cfg = kernels.config;
  RawBlocks out;
  out.polar.assign(static_cast<std::size_t>(cfg.polar_dim()), 0.0);
  out.cartesian.assign(static_cast<std::size_t>(cfg.cartesian_dim()), 0.0);
  std::vector<double> psi_p(out.polar.size()), psi_c(out.cartesian.size());

  bool any_gradient = false;
  for (const PixelAttributes& p : pixel_attributes(patch)) {
    if (!(p.m > 0.0)) continue;
    any_gradient = true;
    const double weight = p.g * std::sqrt(p.m);
    polar_embedding(p, kernels, psi_p);
    cartesian_embedding(p, patch.width(), kernels, psi_c);
    for (std::size_t i = 0; i < psi_p.size(); ++i) out.polar[i] += weight * psi_p[i];
    for (std::size_t i = 0; i < psi_c.size(); ++i) out.cartesian[i] += weight * psi_c[i];
  }
  out.degenerate = !any_gradient;
  return out;
}

Descriptor describe_polar(const Patch& patch, const DescriptorConfig& cfg) {
  const DescriptorKernels kernels(cfg);
  return assemble(aggregate_reference(patch, kernels), Variant::polar, cfg.combine);
}

Descriptor describe_cartesian(const Patch& patch, const DescriptorConfig& cfg) {
  const DescriptorKernels kernels(cfg);
  return assemble(aggregate_reference(patch, kernels), Variant::cartesian, cfg.combine);
}

Descriptor describe_combined(const Patch& patch, const DescriptorConfig& cfg) {
  const DescriptorKernels kernels(cfg);
  return assemble(aggregate_reference(patch, kernels), Variant::combined, cfg.combine);
}

}  // namespace kpd
