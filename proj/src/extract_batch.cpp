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

#include <set>

#include <omp.h>

#include "kpd/descriptor.hpp"

namespace kpd {

namespace {

DescriptorSet make_set(std::size_t count, int dim, Variant variant) {
  DescriptorSet set;
  set.variant = variant;
  set.values.setZero(static_cast<Eigen::Index>(count), dim);
  set.degenerate.assign(count, 0);
  return set;
}

void store(DescriptorSet& set, std::size_t row, const Descriptor& d) {
  for (int j = 0; j < d.dim(); ++j) set.values(static_cast<Eigen::Index>(row), j) = d.values[j];
  set.degenerate[row] = d.degenerate ? 1 : 0;
}

}  // namespace

DescriptorSet extract_reference(std::span<const Patch> patches, Variant variant,
                                const DescriptorConfig& cfg) {
  const DescriptorKernels kernels(cfg);
  DescriptorSet set = make_set(patches.size(), cfg.dim(variant), variant);
  for (std::size_t i = 0; i < patches.size(); ++i) {
    store(set, i, assemble(aggregate_reference(patches[i], kernels), variant, cfg.combine));
  }
  return set;
}

DescriptorSet extract_serial(const DescriptorExtractor& extractor, std::span<const Patch> patches,
                             Variant variant) {
  DescriptorSet set = make_set(patches.size(), extractor.dim(variant), variant);
  for (std::size_t i = 0; i < patches.size(); ++i) store(set, i, extractor.describe(patches[i], variant));
  return set;
}

DescriptorSet extract_parallel(const DescriptorExtractor& extractor, std::span<const Patch> patches,
                               Variant variant, int threads) {
  DescriptorSet set = make_set(patches.size(), extractor.dim(variant), variant);
  std::set<int> widths;
  for (const Patch& p : patches) widths.insert(p.width());
  for (int w : widths) extractor.prepare(w);

  const auto n = static_cast<std::ptrdiff_t>(patches.size());
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(team)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto row = static_cast<std::size_t>(i);
    store(set, row, extractor.describe(patches[row], variant));
  }
  return set;
}

}  // namespace kpd
