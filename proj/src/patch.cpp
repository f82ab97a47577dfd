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

#include "kpd/patch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kpd {

double wrap_angle(double radians) {
  double r = std::fmod(radians, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value plus 2pi can round up to exactly 2pi.
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

Patch::Patch(int width, std::vector<double> intensities)
    : width_(width), values_(std::move(intensities)) {
  if (width_ < 3) {
    throw std::invalid_argument("patch width must be at least 3, got " + std::to_string(width_));
  }
  if (values_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(width_)) {
    throw std::invalid_argument("patch buffer has " + std::to_string(values_.size()) +
                                " values, expected W*W for W=" + std::to_string(width_));
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw std::invalid_argument("patch intensities must be finite and in [0,1]");
    }
  }
}

Patch Patch::constant(int width, double value) {
  return Patch(width, std::vector<double>(static_cast<std::size_t>(width) * width, value));
}

double Patch::clamped(int x, int y) const {
  x = std::clamp(x, 1, width_);
  y = std::clamp(y, 1, width_);
  return at(x, y);
}

GradientField compute_gradients(const Patch& patch) {
  const int w = patch.width();
  GradientField field;
  field.width = w;
  const std::size_t n = patch.size();
  field.magnitude.resize(n);
  field.angle.resize(n);
  field.dx.resize(n);
  field.dy.resize(n);
  for (int y = 1; y <= w; ++y) {
    for (int x = 1; x <= w; ++x) {
      const double gx = patch.clamped(x + 1, y) - patch.clamped(x - 1, y);
      const double gy = patch.clamped(x, y + 1) - patch.clamped(x, y - 1);
      const std::size_t i = patch.index(x, y);
      const double m = std::hypot(gx, gy);
      field.dx[i] = gx;
      field.dy[i] = gy;
      field.magnitude[i] = m;
      field.angle[i] = m > 0.0 ? wrap_angle(std::atan2(gy, gx)) : 0.0;
    }
  }
  return field;
}

double raw_radius(int x, int y, int width) {
  const double c = patch_center(width);
  return std::hypot(x - c, y - c) / radial_scale(width);
}

PixelAttributes make_attributes(int x, int y, int width, double theta, double m) {
  const double c = patch_center(width);
  const double ox = x - c;
  const double oy = y - c;
  PixelAttributes a;
  a.x = x;
  a.y = y;
  a.rho = std::min(1.0, std::hypot(ox, oy) / radial_scale(width));
  a.phi = (ox == 0.0 && oy == 0.0) ? 0.0 : wrap_angle(std::atan2(oy, ox));
  a.theta = wrap_angle(theta);
  a.theta_rel = wrap_angle(a.theta - a.phi);
  a.m = m;
  a.g = std::exp(-a.rho * a.rho);
  return a;
}

std::vector<PixelAttributes> pixel_attributes(const Patch& patch) {
  const GradientField grad = compute_gradients(patch);
  const int w = patch.width();
  std::vector<PixelAttributes> out;
  out.reserve(patch.size());
  for (int y = 1; y <= w; ++y) {
    for (int x = 1; x <= w; ++x) {
      const std::size_t i = patch.index(x, y);
      out.push_back(make_attributes(x, y, w, grad.angle[i], grad.magnitude[i]));
    }
  }
  return out;
}

SyntheticTransform SyntheticTransform::rotation(double degrees) {
  SyntheticTransform t;
  t.kind = Kind::rotation;
  t.degrees = degrees;
  return t;
}

SyntheticTransform SyntheticTransform::translation(int dx, int dy) {
  SyntheticTransform t;
  t.kind = Kind::translation;
  t.dx = dx;
  t.dy = dy;
  return t;
}

bool SyntheticTransform::in_range() const {
  if (kind == Kind::rotation) return std::abs(degrees) <= kMaxRotationDegrees;
  return std::hypot(static_cast<double>(dx), static_cast<double>(dy)) <= kMaxTranslationPixels;
}

namespace {

double sample_bilinear(const Patch& patch, double sx, double sy) {
  const double w = patch.width();
  sx = std::clamp(sx, 1.0, w);
  sy = std::clamp(sy, 1.0, w);
  const int x0 = static_cast<int>(std::floor(sx));
  const int y0 = static_cast<int>(std::floor(sy));
  const double fx = sx - x0;
  const double fy = sy - y0;
  const double v00 = patch.clamped(x0, y0);
  const double v10 = patch.clamped(x0 + 1, y0);
  const double v01 = patch.clamped(x0, y0 + 1);
  const double v11 = patch.clamped(x0 + 1, y0 + 1);
  const double top = v00 + fx * (v10 - v00);
  const double bottom = v01 + fx * (v11 - v01);
  return top + fy * (bottom - top);
}

}  // namespace

Patch apply_synthetic_transform(const Patch& patch, const SyntheticTransform& transform) {
  if (!transform.in_range()) {
    throw std::invalid_argument("synthetic transform outside the supported sweep range");
  }
  const int w = patch.width();
  std::vector<double> out(patch.size());
  if (transform.kind == SyntheticTransform::Kind::translation) {
    for (int y = 1; y <= w; ++y) {
      for (int x = 1; x <= w; ++x) {
        out[patch.index(x, y)] = patch.clamped(x - transform.dx, y - transform.dy);
      }
    }
    return Patch(w, std::move(out));
  }

  const double angle = transform.degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(angle);
  const double sn = std::sin(angle);
  const double c = patch_center(w);
  for (int y = 1; y <= w; ++y) {
    for (int x = 1; x <= w; ++x) {
      // Inverse map: rotate the output position by -angle into the source.
      const double ox = x - c;
      const double oy = y - c;
      const double sx = c + cs * ox + sn * oy;
      const double sy = c - sn * ox + cs * oy;
      out[patch.index(x, y)] = std::clamp(sample_bilinear(patch, sx, sy), 0.0, 1.0);
    }
  }
  return Patch(w, std::move(out));
}

}  // namespace kpd
