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

// Reference vs serial vs OpenMP batch extraction of combined descriptors.
// Throughput counters are patches per second.

#include <benchmark/benchmark.h>

#include "kpd/bench/synthetic.hpp"
#include "kpd/descriptor.hpp"

namespace {

const std::vector<kpd::Patch>& patches() {
  static const auto set = [] {
    kpd::bench::SyntheticSetOptions o;
    o.points = 64;
    o.views = 4;
    return kpd::bench::make_synthetic_set(o);
  }();
  return set.patches;
}

void BM_Reference(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(kpd::extract_reference(patches(), kpd::Variant::combined));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(patches().size()));
}

void BM_Serial(benchmark::State& state) {
  const kpd::DescriptorExtractor ex;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kpd::extract_serial(ex, patches(), kpd::Variant::combined));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(patches().size()));
}

void BM_Parallel(benchmark::State& state) {
  const kpd::DescriptorExtractor ex;
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kpd::extract_parallel(ex, patches(), kpd::Variant::combined, threads));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(patches().size()));
}

}  // namespace

BENCHMARK(BM_Reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Parallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
