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

#include "kpd/container.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "kpd/error.hpp"

namespace kpd {

namespace {

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(U)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw InputFormatError(std::string("truncated container while reading ") + what);
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

void put_f32(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }
float get_f32(std::istream& in, const char* what) { return std::bit_cast<float>(get_le<std::uint32_t>(in, what)); }
double get_f64(std::istream& in, const char* what) { return std::bit_cast<double>(get_le<std::uint64_t>(in, what)); }

void expect_magic(std::istream& in, const char (&magic)[5]) {
  char got[4] = {};
  in.read(got, 4);
  if (in.gcount() != 4 || std::memcmp(got, magic, 4) != 0) {
    throw InputFormatError(std::string("missing ") + magic + " magic");
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputFormatError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputFormatError("cannot open " + path.string());
  return in;
}

}  // namespace

void write_descriptors(std::ostream& out, const DescriptorSet& set) {
  out.write("KPDC", 4);
  put_le<std::uint32_t>(out, kDescriptorFormatVersion);
  put_le<std::uint64_t>(out, set.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.dim()));
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(set.variant));
  for (Eigen::Index i = 0; i < set.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < set.values.cols(); ++j) put_f32(out, set.values(i, j));
  }
  if (!out) throw InputFormatError("failed writing descriptor container");
}

void write_descriptors(const std::filesystem::path& path, const DescriptorSet& set) {
  std::ofstream out = open_out(path);
  write_descriptors(out, set);
}

DescriptorSet read_descriptors(std::istream& in) {
  expect_magic(in, "KPDC");
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != kDescriptorFormatVersion) {
    throw InputFormatError("unsupported KPDC version " + std::to_string(version));
  }
  const auto count = get_le<std::uint64_t>(in, "count");
  const auto dim = get_le<std::uint32_t>(in, "dim");
  const auto code = get_le<std::uint8_t>(in, "variant");
  if (code > static_cast<std::uint8_t>(Variant::postprocessed)) {
    throw InputFormatError("unknown KPDC variant code " + std::to_string(code));
  }
  if (dim == 0 && count > 0) throw InputFormatError("KPDC dim is zero");
  DescriptorSet set;
  set.variant = static_cast<Variant>(code);
  set.values.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  set.degenerate.assign(count, 0);
  for (Eigen::Index i = 0; i < set.values.rows(); ++i) {
    bool zero = true;
    for (Eigen::Index j = 0; j < set.values.cols(); ++j) {
      const float v = get_f32(in, "values");
      set.values(i, j) = v;
      zero = zero && v == 0.0f;
    }
    set.degenerate[static_cast<std::size_t>(i)] = zero ? 1 : 0;
  }
  return set;
}

DescriptorSet read_descriptors(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_descriptors(in);
}

void write_model(std::ostream& out, const WhiteningModel& model) {
  out.write("KPWM", 4);
  put_le<std::uint32_t>(out, kModelFormatVersion);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(model.variant));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.input_dim()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.output_dim()));
  put_f64(out, model.t);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.shrink_index));
  put_f64(out, model.beta);
  for (Eigen::Index i = 0; i < model.mean.size(); ++i) put_f64(out, model.mean(i));
  for (Eigen::Index j = 0; j < model.projection.cols(); ++j) {
    for (Eigen::Index i = 0; i < model.projection.rows(); ++i) put_f64(out, model.projection(i, j));
  }
  if (!out) throw InputFormatError("failed writing whitening model");
}

void write_model(const std::filesystem::path& path, const WhiteningModel& model) {
  std::ofstream out = open_out(path);
  write_model(out, model);
}

WhiteningModel read_model(std::istream& in) {
  expect_magic(in, "KPWM");
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != kModelFormatVersion) {
    throw InputFormatError("unsupported KPWM version " + std::to_string(version));
  }
  const auto code = get_le<std::uint8_t>(in, "variant");
  if (code > static_cast<std::uint8_t>(WhiteningVariant::pca_sqrt)) {
    throw InputFormatError("unknown KPWM variant code " + std::to_string(code));
  }
  const auto d_in = get_le<std::uint32_t>(in, "d_in");
  const auto d_out = get_le<std::uint32_t>(in, "d_out");
  if (d_out > d_in) throw InputFormatError("KPWM d_out exceeds d_in");
  WhiteningModel m;
  m.variant = static_cast<WhiteningVariant>(code);
  m.t = get_f64(in, "t");
  m.shrink_index = static_cast<int>(get_le<std::uint32_t>(in, "shrink index"));
  m.beta = get_f64(in, "beta");
  m.mean.resize(d_in);
  for (std::uint32_t i = 0; i < d_in; ++i) m.mean(i) = get_f64(in, "mean");
  m.projection.resize(d_in, d_out);
  for (std::uint32_t j = 0; j < d_out; ++j) {
    for (std::uint32_t i = 0; i < d_in; ++i) m.projection(i, j) = get_f64(in, "projection");
  }
  return m;
}

WhiteningModel read_model(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_model(in);
}

}  // namespace kpd
