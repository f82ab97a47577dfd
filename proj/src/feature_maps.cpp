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

#include "kpd/feature_maps.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kpd {

namespace {

std::vector<double> trapezoid_coeffs(double kappa, int frequencies, int nodes) {
  std::vector<double> gamma(static_cast<std::size_t>(frequencies) + 1, 0.0);
  const double step = 2.0 * std::numbers::pi / nodes;
  for (int j = 0; j < nodes; ++j) {
    const double d = j * step;
    const double k = std::exp(kappa * (std::cos(d) - 1.0));
    for (int i = 0; i <= frequencies; ++i) gamma[i] += k * std::cos(i * d);
  }
  gamma[0] /= nodes;
  for (int i = 1; i <= frequencies; ++i) gamma[i] *= 2.0 / nodes;
  return gamma;
}

}  // namespace

FourierCoeffs vm_fourier_coeffs(double kappa, int frequencies) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("Von Mises concentration must be positive");
  }
  if (frequencies < 1) throw std::invalid_argument("at least one frequency is required");

  // The integrand is periodic and analytic, so the trapezoid rule converges
  // geometrically; double the grid until it stops moving.
  int nodes = 64;
  std::vector<double> prev = trapezoid_coeffs(kappa, frequencies, nodes);
  for (;;) {
    nodes *= 2;
    std::vector<double> next = trapezoid_coeffs(kappa, frequencies, nodes);
    double change = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) change = std::max(change, std::abs(next[i] - prev[i]));
    prev = std::move(next);
    if (change < 1e-14 || nodes >= (1 << 20)) break;
  }

  FourierCoeffs out;
  out.gamma = std::move(prev);
  for (double& g : out.gamma) {
    if (g < 0.0) {
      g = 0.0;
      out.clamped = true;
    }
  }
  return out;
}

FourierCoeffs vm_fourier_coeffs(const AttributeKernelConfig& cfg) {
  return vm_fourier_coeffs(cfg.kappa, cfg.frequencies);
}

double vm_kernel_exact(double delta, double kappa) {
  return std::exp(kappa * (std::cos(delta) - 1.0));
}

double eval_kernel_truncated(double delta, const FourierCoeffs& coeffs) {
  double sum = 0.0;
  for (std::size_t i = 0; i < coeffs.gamma.size(); ++i) {
    sum += coeffs.gamma[i] * std::cos(static_cast<double>(i) * delta);
  }
  return sum;
}

FeatureMap::FeatureMap(const FourierCoeffs& coeffs) {
  if (coeffs.gamma.size() < 2) throw std::invalid_argument("feature map needs at least one frequency");
  root_gamma_.reserve(coeffs.gamma.size());
  for (double g : coeffs.gamma) {
    if (!(g >= 0.0)) throw std::invalid_argument("Fourier coefficients must be non-negative");
    root_gamma_.push_back(std::sqrt(g));
  }
}

void FeatureMap::embed(double value, std::span<double> out) const {
  embed(std::cos(value), std::sin(value), out);
}

void FeatureMap::embed(double cos_v, double sin_v, std::span<double> out) const {
  const int n = frequencies();
  out[0] = root_gamma_[0];
  double c = cos_v;
  double s = sin_v;
  for (int i = 1; i <= n; ++i) {
    out[i] = root_gamma_[i] * c;
    out[n + i] = root_gamma_[i] * s;
    const double c_next = c * cos_v - s * sin_v;
    s = s * cos_v + c * sin_v;
    c = c_next;
  }
}

std::vector<double> FeatureMap::operator()(double value) const {
  std::vector<double> out(static_cast<std::size_t>(dim()));
  embed(value, out);
  return out;
}

std::vector<double> embed_scalar(double value, const FourierCoeffs& coeffs) {
  return FeatureMap(coeffs)(value);
}

}  // namespace kpd
