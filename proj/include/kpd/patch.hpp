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

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle into [0, 2pi).
double wrap_angle(double radians);

/// Square W x W grayscale patch with intensities in [0,1], stored row-major.
///
/// Pixel coordinates are 1-based: x is the column in {1..W}, y is the row in
/// {1..W}. Throws std::invalid_argument when W < 3, the buffer size is not
/// W*W, or an intensity is non-finite or outside [0,1].
class Patch {
 public:
  Patch() = default;
  Patch(int width, std::vector<double> intensities);

  static Patch constant(int width, double value);

  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double at(int x, int y) const { return values_[index(x, y)]; }
  std::span<const double> intensities() const { return values_; }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y - 1) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x - 1);
  }

  // Value at (x, y) with coordinates clamped into the patch (replicate padding).
  double clamped(int x, int y) const;

 private:
  int width_ = 0;
  std::vector<double> values_;
};

struct GradientField {
  int width = 0;
  std::vector<double> magnitude;  // m >= 0
  std::vector<double> angle;      // theta in [0, 2pi), 0 where m == 0
  std::vector<double> dx;
  std::vector<double> dy;
};

// Central differences [-1, 0, 1] along both axes with replicate padding.
GradientField compute_gradients(const Patch& patch);

struct PixelAttributes {
  int x = 0;
  int y = 0;
  double rho = 0.0;        // radial distance / ((W-1)/2), clamped to 1
  double phi = 0.0;        // polar angle, 0 at the exact centre
  double theta = 0.0;      // absolute gradient angle
  double theta_rel = 0.0;  // wrap(theta - phi)
  double m = 0.0;          // gradient magnitude
  double g = 1.0;          // exp(-rho^2)
};

/// Patch centre coordinate, (W+1)/2 on both axes.
inline double patch_center(int width) { return 0.5 * (width + 1); }

/// Distance from the centre to the middle of an edge, (W-1)/2. rho is 1 on
/// the inscribed circle, so the edge midpoints sit at rho = 1 and the
/// corners at sqrt(2) before clamping.
inline double radial_scale(int width) { return 0.5 * (width - 1); }

/// Unclamped distance from the centre divided by radial_scale(W).
double raw_radius(int x, int y, int width);

/// Polar geometry of a grid position plus a gradient (theta, m).
PixelAttributes make_attributes(int x, int y, int width, double theta, double m);

std::vector<PixelAttributes> pixel_attributes(const Patch& patch);

struct SyntheticTransform {
  enum class Kind { rotation, translation };

  static constexpr double kMaxRotationDegrees = 30.0;
  static constexpr double kMaxTranslationPixels = 12.0;

  Kind kind = Kind::rotation;
  double degrees = 0.0;
  int dx = 0;
  int dy = 0;

  static SyntheticTransform rotation(double degrees);
  static SyntheticTransform translation(int dx, int dy = 0);

  // |degrees| <= 30 and hypot(dx, dy) <= 12.
  bool in_range() const;
};

/// Rotation: bilinear resampling about the patch centre, positive degrees turn
/// content from +x towards +y. Translation: integer shift so that
/// out(x, y) = in(x - dx, y - dy). Out-of-support samples use replicate padding.
Patch apply_synthetic_transform(const Patch& patch, const SyntheticTransform& transform);

}  // namespace kpd
