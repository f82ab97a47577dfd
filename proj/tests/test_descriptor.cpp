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
#include <random>

#include <gtest/gtest.h>

#include "kpd/descriptor.hpp"
#include "oracles.hpp"

using namespace kpd;

namespace {

oracle::Gammas gammas(const DescriptorKernels& k) {
  return {k.phi_coeffs.gamma, k.rho_coeffs.gamma, k.theta_rel_coeffs.gamma,
          k.x_coeffs.gamma,   k.y_coeffs.gamma,   k.theta_coeffs.gamma};
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

Patch random_patch(int w, std::mt19937_64& rng) { return Patch(w, oracle::random_image(w, rng).v); }

}  // namespace

TEST(Descriptor, Dimensions) {
  const DescriptorConfig cfg;
  EXPECT_EQ(cfg.dim(Variant::polar), 175);
  EXPECT_EQ(cfg.dim(Variant::cartesian), 63);
  EXPECT_EQ(cfg.dim(Variant::combined), 238);
  EXPECT_THROW(cfg.dim(Variant::postprocessed), std::invalid_argument);
  std::mt19937_64 rng(1);
  const Patch p = random_patch(64, rng);
  EXPECT_EQ(describe_polar(p).dim(), 175);
  EXPECT_EQ(describe_cartesian(p).dim(), 63);
  EXPECT_EQ(describe_combined(p).dim(), 238);
}

TEST(Descriptor, ConstantPatchIsDegenerate) {
  const Patch c = Patch::constant(16, 0.4);
  for (const Descriptor& d : {describe_polar(c), describe_cartesian(c), describe_combined(c)}) {
    EXPECT_TRUE(d.degenerate);
    for (double v : d.values) EXPECT_EQ(v, 0.0);
  }
  const DescriptorExtractor ex;
  EXPECT_TRUE(ex.describe(c, Variant::combined).degenerate);
}

TEST(Descriptor, UnitNorm) {
  std::mt19937_64 rng(2);
  for (int w : {8, 13, 32, 64, 65}) {
    const Patch p = random_patch(w, rng);
    EXPECT_NEAR(norm(describe_polar(p).values), 1.0, 1e-9);
    EXPECT_NEAR(norm(describe_combined(p).values), 1.0, 1e-9);
  }
}

TEST(Descriptor, MatchesBruteForceDoubleSum) {
  const DescriptorKernels k;
  const auto g = gammas(k);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 6; ++trial) {
    const int w = 8 + trial % 5;
    const auto a = oracle::random_image(w, rng);
    const auto b = oracle::random_image(w, rng);
    const Patch pa(w, a.v), pb(w, b.v);
    EXPECT_NEAR(dot(describe_polar(pa).values, describe_polar(pb).values),
                oracle::normalized_match_kernel(a, b, oracle::Kind::polar, g), 1e-9);
    EXPECT_NEAR(dot(describe_cartesian(pa).values, describe_cartesian(pb).values),
                oracle::normalized_match_kernel(a, b, oracle::Kind::cartesian, g), 1e-9);
    EXPECT_NEAR(dot(describe_combined(pa).values, describe_combined(pb).values),
                oracle::normalized_match_kernel(a, b, oracle::Kind::combined, g), 1e-9);
  }
}

TEST(Descriptor, CombinedBlockIdentity) {
  std::mt19937_64 rng(4);
  const DescriptorKernels k;
  const Patch p = random_patch(20, rng), q = random_patch(20, rng);
  const RawBlocks a = aggregate_reference(p, k), b = aggregate_reference(q, k);
  std::vector<double> ca(a.polar), cb(b.polar);
  ca.insert(ca.end(), a.cartesian.begin(), a.cartesian.end());
  cb.insert(cb.end(), b.cartesian.begin(), b.cartesian.end());
  EXPECT_NEAR(dot(ca, cb), dot(a.polar, b.polar) + dot(a.cartesian, b.cartesian), 1e-12);
  // The assembled combined descriptor is that concatenation, normalized once.
  const Descriptor d = assemble(a, Variant::combined, CombineMode::raw_concat);
  const double n = norm(ca);
  for (std::size_t i = 0; i < ca.size(); ++i) EXPECT_NEAR(d.values[i], ca[i] / n, 1e-15);
}

TEST(Descriptor, BlockNormalizedModeDiffers) {
  std::mt19937_64 rng(40);
  const DescriptorKernels k;
  const RawBlocks a = aggregate_reference(random_patch(20, rng), k);
  const Descriptor bn = assemble(a, Variant::combined, CombineMode::block_normalized);
  std::vector<double> head(bn.values.begin(), bn.values.begin() + 175);
  std::vector<double> tail(bn.values.begin() + 175, bn.values.end());
  EXPECT_NEAR(norm(head), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(norm(tail), std::sqrt(0.5), 1e-12);
}

TEST(Descriptor, JointRotationInvarianceAtAttributeLevel) {
  const DescriptorKernels k;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(0, kTwoPi), unit(0, 1);
  auto random_set = [&](int n) {
    std::vector<PixelAttributes> s(n);
    for (auto& p : s) {
      p.phi = ang(rng);
      p.theta = ang(rng);
      p.rho = unit(rng);
      p.m = unit(rng);
      p.g = std::exp(-p.rho * p.rho);
      p.theta_rel = wrap_angle(p.theta - p.phi);
    }
    return s;
  };
  auto aggregate = [&](const std::vector<PixelAttributes>& s) {
    std::vector<double> acc(175, 0.0), e(175);
    for (const auto& p : s) {
      polar_embedding(p, k, e);
      for (int i = 0; i < 175; ++i) acc[i] += p.g * std::sqrt(p.m) * e[i];
    }
    return acc;
  };
  const auto P = random_set(40), Q = random_set(40);
  const double base = dot(aggregate(P), aggregate(Q));
  for (double delta : {0.3, 1.7, 4.0}) {
    auto shift = [&](std::vector<PixelAttributes> s) {
      for (auto& p : s) {
        p.phi = wrap_angle(p.phi + delta);
        p.theta = wrap_angle(p.theta + delta);
        p.theta_rel = wrap_angle(p.theta - p.phi);
      }
      return s;
    };
    EXPECT_NEAR(dot(aggregate(shift(P)), aggregate(shift(Q))), base, 1e-9);
  }
}

TEST(Descriptor, JointTranslationInvarianceAtAttributeLevel) {
  const DescriptorKernels k;
  const int w = 32;
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> pos(1, 20);
  std::uniform_real_distribution<double> ang(0, kTwoPi), unit(0.1, 1);
  auto random_set = [&](int n) {
    std::vector<PixelAttributes> s(n);
    for (auto& p : s) {
      p.x = pos(rng);
      p.y = pos(rng);
      p.theta = ang(rng);
      p.m = unit(rng);
    }
    return s;
  };
  auto aggregate = [&](const std::vector<PixelAttributes>& s) {
    std::vector<double> acc(63, 0.0), e(63);
    for (const auto& p : s) {
      cartesian_embedding(p, w, k, e);
      for (int i = 0; i < 63; ++i) acc[i] += std::sqrt(p.m) * e[i];
    }
    return acc;
  };
  const auto P = random_set(30), Q = random_set(30);
  const double base = dot(aggregate(P), aggregate(Q));
  for (int s : {3, 12}) {
    auto shift = [&](std::vector<PixelAttributes> v, bool along_x) {
      for (auto& p : v) (along_x ? p.x : p.y) += s;
      return v;
    };
    EXPECT_NEAR(dot(aggregate(shift(P, true)), aggregate(shift(Q, true))), base, 1e-9);
    EXPECT_NEAR(dot(aggregate(shift(P, false)), aggregate(shift(Q, false))), base, 1e-9);
  }
}

TEST(Descriptor, IntensityScaleIsAbsorbed) {
  std::mt19937_64 rng(7);
  const Patch p = random_patch(24, rng);
  for (double c : {0.25, 0.5, 0.9}) {
    std::vector<double> v;
    for (double x : p.intensities()) v.push_back(c * x);
    const Patch q(24, v);
    const auto a = describe_combined(p), b = describe_combined(q);
    for (int i = 0; i < a.dim(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-9);
  }
}

TEST(Normalize, Cases) {
  Descriptor z;
  z.values.assign(5, 0.0);
  for (double v : normalize(z).values) EXPECT_EQ(v, 0.0);
  Descriptor u;
  u.values = {0.6, 0.8};
  const auto nu = normalize(u);
  EXPECT_NEAR(nu.values[0], 0.6, 1e-16);
  EXPECT_NEAR(nu.values[1], 0.8, 1e-16);
  Descriptor r;
  r.values = {3.0, -4.0, 12.0};
  const auto once = normalize(r), twice = normalize(once);
  EXPECT_NEAR(once.values[2], 12.0 / 13.0, 1e-16);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(once.values[i], twice.values[i]);
}

TEST(Extraction, FastPathMatchesReference) {
  std::mt19937_64 rng(8);
  const DescriptorExtractor ex;
  for (int w : {8, 31, 64, 65}) {
    const Patch p = random_patch(w, rng);
    for (Variant v : {Variant::polar, Variant::cartesian, Variant::combined}) {
      const auto fast = ex.describe(p, v);
      const auto ref = assemble(aggregate_reference(p, ex.kernels()), v, CombineMode::raw_concat);
      ASSERT_EQ(fast.dim(), ref.dim());
      for (int i = 0; i < fast.dim(); ++i) EXPECT_NEAR(fast.values[i], ref.values[i], 1e-12);
    }
  }
}

TEST(Extraction, ParallelIsBitIdenticalToSerial) {
  std::mt19937_64 rng(9);
  std::vector<Patch> patches;
  for (int i = 0; i < 97; ++i) patches.push_back(random_patch(32, rng));
  patches[13] = Patch::constant(32, 0.2);
  const DescriptorExtractor ex;
  const auto s = extract_serial(ex, patches, Variant::combined);
  for (int threads : {1, 2, 4}) {
    const auto p = extract_parallel(ex, patches, Variant::combined, threads);
    ASSERT_EQ(p.values.rows(), s.values.rows());
    EXPECT_TRUE((p.values.array() == s.values.array()).all()) << threads;
    EXPECT_EQ(p.degenerate, s.degenerate);
  }
  EXPECT_EQ(s.degenerate[13], 1);
  const auto r = extract_reference(patches, Variant::combined);
  EXPECT_LT((r.values - s.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Descriptor, ConstantComponentsOfBothBlocksAreProportional) {
  // Both blocks carry sum_p g sqrt(m) times their gamma_0 product, so the
  // combined descriptor has exact linear dependencies between blocks.
  const DescriptorKernels k;
  const double polar0 = std::sqrt(k.phi_coeffs.gamma[0] * k.rho_coeffs.gamma[0] * k.theta_rel_coeffs.gamma[0]);
  const double cart0 = std::sqrt(k.x_coeffs.gamma[0] * k.y_coeffs.gamma[0] * k.theta_coeffs.gamma[0]);
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    const RawBlocks b = aggregate_reference(random_patch(16, rng), k);
    EXPECT_NEAR(b.polar[0] / polar0, b.cartesian[0] / cart0, 1e-12 * std::abs(b.polar[0] / polar0));
  }
}
