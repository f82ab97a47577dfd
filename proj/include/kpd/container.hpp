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
#include <iosfwd>

#include "kpd/descriptor.hpp"
#include "kpd/whitening.hpp"

namespace kpd {

// KPDC descriptor container, all fields little-endian:
//   char[4]  "KPDC"
//   uint32   format version (1)
//   uint64   descriptor count
//   uint32   dim
//   uint8    variant code (see Variant)
//   float32  values[count * dim], row-major
//
// KPWM whitening model container, little-endian:
//   char[4]  "KPWM"
//   uint32   format version (1)
//   uint8    variant code (see WhiteningVariant)
//   uint32   d_in
//   uint32   d_out
//   float64  t
//   uint32   shrink index
//   float64  beta
//   float64  mean[d_in]
//   float64  projection[d_in * d_out], column-major
inline constexpr std::uint32_t kDescriptorFormatVersion = 1;
inline constexpr std::uint32_t kModelFormatVersion = 1;

// Values are narrowed to float32 on write. Degenerate flags are not stored;
// readers mark all-zero rows as degenerate.
void write_descriptors(std::ostream& out, const DescriptorSet& set);
void write_descriptors(const std::filesystem::path& path, const DescriptorSet& set);
// Throws InputFormatError on bad magic, unsupported version or truncation.
DescriptorSet read_descriptors(std::istream& in);
DescriptorSet read_descriptors(const std::filesystem::path& path);

void write_model(std::ostream& out, const WhiteningModel& model);
void write_model(const std::filesystem::path& path, const WhiteningModel& model);
WhiteningModel read_model(std::istream& in);
WhiteningModel read_model(const std::filesystem::path& path);

}  // namespace kpd
