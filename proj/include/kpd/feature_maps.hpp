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

#include <numbers>
#include <span>
#include <vector>

namespace kpd {

// Angles embed on their native period; bounded scalars (rho, x, y) are first
// mapped linearly onto [0, pi] so the kernel does not wrap across the patch.
enum class EmbeddingDomain { full_period, half_period };

struct AttributeKernelConfig {
  double kappa = 8.0;
  int frequencies = 3;
  EmbeddingDomain domain = EmbeddingDomain::full_period;

  int dim() const { return 2 * frequencies + 1; }
};

/// Truncated Fourier cosine series of the Von Mises kernel
/// k(d) = exp(kappa * (cos d - 1)): k(d) ~ sum_i gamma[i] * cos(i * d).
struct FourierCoeffs {
  std::vector<double> gamma;
  bool clamped = false;  // set when a negative coefficient was clamped to 0

  int frequencies() const { return static_cast<int>(gamma.size()) - 1; }
  int dim() const { return 2 * frequencies() + 1; }
};

/// Coefficients by periodic trapezoid quadrature, refined until the change
/// between successive grids falls below 1e-14. Throws std::invalid_argument
/// for kappa <= 0 or frequencies < 1.
FourierCoeffs vm_fourier_coeffs(double kappa, int frequencies);
FourierCoeffs vm_fourier_coeffs(const AttributeKernelConfig& cfg);

double vm_kernel_exact(double delta, double kappa);
double eval_kernel_truncated(double delta, const FourierCoeffs& coeffs);

/// Maps u in [0,1] onto [0, pi].
inline double map_to_half_period(double u) { return u * std::numbers::pi; }

/// Explicit feature map psi with psi(p) . psi(q) = sum_i gamma_i cos(i (p - q)).
///
/// Layout: (sqrt g0, sqrt g1 cos v, ..., sqrt gN cos Nv, sqrt g1 sin v, ...,
/// sqrt gN sin Nv).
class FeatureMap {
 public:
  explicit FeatureMap(const FourierCoeffs& coeffs);

  int dim() const { return static_cast<int>(2 * root_gamma_.size() - 1); }
  int frequencies() const { return static_cast<int>(root_gamma_.size()) - 1; }

  // out.size() must equal dim().
  void embed(double value, std::span<double> out) const;
  // Same map from a precomputed (cos v, sin v); higher harmonics by recurrence.
  void embed(double cos_v, double sin_v, std::span<double> out) const;

  std::vector<double> operator()(double value) const;

 private:
  std::vector<double> root_gamma_;
};

/// Throws std::invalid_argument on a negative coefficient.
std::vector<double> embed_scalar(double value, const FourierCoeffs& coeffs);

}  // namespace kpd
