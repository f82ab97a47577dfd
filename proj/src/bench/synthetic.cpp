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

#include "kpd/bench/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "kpd/bench/random.hpp"

namespace kpd::bench {

namespace {

struct Component {
  enum class Kind { blob, edge, ridge } kind = Kind::blob;
  double amplitude = 0.0;
  double cx = 0.0, cy = 0.0;
  double cos_a = 1.0, sin_a = 0.0;
  double s1 = 0.1, s2 = 0.1;  // blob: axis scales; edge/ridge: s1 = softness / half-width
};

struct Scene {
  std::vector<Component> parts;

  double eval(double u, double v) const {
    double value = 0.5;
    for (const Component& c : parts) {
      const double du = u - c.cx;
      const double dv = v - c.cy;
      const double a = c.cos_a * du + c.sin_a * dv;
      switch (c.kind) {
        case Component::Kind::blob: {
          const double b = -c.sin_a * du + c.cos_a * dv;
          value += c.amplitude * std::exp(-0.5 * (a * a / (c.s1 * c.s1) + b * b / (c.s2 * c.s2)));
          break;
        }
        case Component::Kind::edge:
          value += 0.5 * c.amplitude * std::tanh(a / c.s1);
          break;
        case Component::Kind::ridge:
          value += c.amplitude * std::exp(-0.5 * a * a / (c.s1 * c.s1));
          break;
      }
    }
    return value;
  }
};

Scene random_scene(Rng& rng, int components) {
  Scene scene;
  for (int k = 0; k < components; ++k) {
    Component c;
    const double pick = rng.uniform();
    c.kind = pick < 0.5 ? Component::Kind::blob : (pick < 0.8 ? Component::Kind::edge : Component::Kind::ridge);
    c.amplitude = rng.uniform(-0.35, 0.35);
    c.cx = rng.uniform(-1.1, 1.1);
    c.cy = rng.uniform(-1.1, 1.1);
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    c.cos_a = std::cos(angle);
    c.sin_a = std::sin(angle);
    if (c.kind == Component::Kind::blob) {
      c.s1 = rng.uniform(0.08, 0.45);
      c.s2 = rng.uniform(0.08, 0.45);
    } else if (c.kind == Component::Kind::edge) {
      c.s1 = rng.uniform(0.02, 0.12);
    } else {
      c.s1 = rng.uniform(0.02, 0.08);
    }
    scene.parts.push_back(c);
  }
  return scene;
}

}  // namespace

LabeledPatchSet make_synthetic_set(const SyntheticSetOptions& o) {
  if (o.points < 1 || o.views < 1 || o.width < 3) throw std::invalid_argument("invalid synthetic set options");
  Rng rng(o.seed);
  LabeledPatchSet set;
  set.source = "synthetic";
  const double half = 0.5 * o.width;
  const double center = 0.5 * (o.width + 1);
  const double deg = std::numbers::pi / 180.0;
  std::vector<double> values(static_cast<std::size_t>(o.width) * o.width);

  for (int p = 0; p < o.points; ++p) {
    const Scene scene = random_scene(rng, o.components);
    for (int v = 0; v < o.views; ++v) {
      const double angle = o.rotation_sigma_deg * deg * rng.normal();
      const double tx = o.translation_sigma_px / half * rng.normal();
      const double ty = o.translation_sigma_px / half * rng.normal();
      const double scale = std::exp(o.scale_sigma * rng.normal());
      const double gain = 1.0 + o.gain_spread * rng.uniform(-1.0, 1.0);
      const double offset = o.offset_spread * rng.uniform(-1.0, 1.0);
      const double cs = std::cos(angle) * scale;
      const double sn = std::sin(angle) * scale;
      for (int y = 1; y <= o.width; ++y) {
        for (int x = 1; x <= o.width; ++x) {
          const double u = (x - center) / half;
          const double w = (y - center) / half;
          const double su = cs * u - sn * w + tx;
          const double sv = sn * u + cs * w + ty;
          double val = 0.5 + gain * (scene.eval(su, sv) - 0.5) + offset + o.noise_sigma * rng.normal();
          values[static_cast<std::size_t>(y - 1) * o.width + (x - 1)] = std::clamp(val, 0.0, 1.0);
        }
      }
      set.patches.emplace_back(o.width, values);
      set.labels.push_back(o.first_label + p);
      set.groups.push_back(0);
      set.views.push_back(0);
    }
  }
  return set;
}

}  // namespace kpd::bench
