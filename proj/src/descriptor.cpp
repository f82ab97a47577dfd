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

#include "kpd/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace kpd {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::polar: return "polar";
    case Variant::cartesian: return "cartesian";
    case Variant::combined: return "combined";
    case Variant::postprocessed: return "postprocessed";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "polar") return Variant::polar;
  if (name == "cartesian") return Variant::cartesian;
  if (name == "combined") return Variant::combined;
  if (name == "postprocessed") return Variant::postprocessed;
  throw std::invalid_argument("unknown descriptor variant '" + std::string(name) + "'");
}

int DescriptorConfig::dim(Variant v) const {
  switch (v) {
    case Variant::polar: return polar_dim();
    case Variant::cartesian: return cartesian_dim();
    case Variant::combined: return polar_dim() + cartesian_dim();
    case Variant::postprocessed: break;
  }
  throw std::invalid_argument("post-processed dimension is defined by the whitening model");
}

DescriptorKernels::DescriptorKernels(const DescriptorConfig& cfg)
    : config(cfg),
      phi_coeffs(vm_fourier_coeffs(cfg.phi)),
      rho_coeffs(vm_fourier_coeffs(cfg.rho)),
      theta_rel_coeffs(vm_fourier_coeffs(cfg.theta_rel)),
      x_coeffs(vm_fourier_coeffs(cfg.x)),
      y_coeffs(vm_fourier_coeffs(cfg.y)),
      theta_coeffs(vm_fourier_coeffs(cfg.theta)),
      phi(phi_coeffs),
      rho(rho_coeffs),
      theta_rel(theta_rel_coeffs),
      x(x_coeffs),
      y(y_coeffs),
      theta(theta_coeffs) {}

void normalize_in_place(std::span<double> values) {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  if (!(sq > 0.0)) return;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& v : values) v *= inv;
}

Descriptor normalize(Descriptor d) {
  normalize_in_place(d.values);
  return d;
}

namespace {

double angle_argument(double angle, EmbeddingDomain domain) {
  return domain == EmbeddingDomain::full_period ? angle : 0.5 * angle;
}

double bounded_argument(double unit, EmbeddingDomain domain) {
  return domain == EmbeddingDomain::half_period ? map_to_half_period(unit) : 2.0 * map_to_half_period(unit);
}

double grid_unit(int c, int width) { return static_cast<double>(c - 1) / static_cast<double>(width - 1); }

// out[(i * b.size() + j) * c.size() + k] = a[i] * b[j] * c[k]
void kron3(std::span<const double> a, std::span<const double> b, std::span<const double> c,
           std::span<double> out) {
  std::size_t o = 0;
  for (double av : a) {
    for (double bv : b) {
      const double ab = av * bv;
      for (double cv : c) out[o++] = ab * cv;
    }
  }
}

void kron2(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  std::size_t o = 0;
  for (double av : a) {
    for (double bv : b) out[o++] = av * bv;
  }
}

}  // namespace

void polar_embedding(const PixelAttributes& p, const DescriptorKernels& k, std::span<double> out) {
  const auto& cfg = k.config;
  std::vector<double> ephi(k.phi.dim()), erho(k.rho.dim()), etr(k.theta_rel.dim());
  k.phi.embed(angle_argument(p.phi, cfg.phi.domain), ephi);
  k.rho.embed(bounded_argument(p.rho, cfg.rho.domain), erho);
  k.theta_rel.embed(angle_argument(p.theta_rel, cfg.theta_rel.domain), etr);
  kron3(ephi, erho, etr, out);
}

void cartesian_embedding(const PixelAttributes& p, int width, const DescriptorKernels& k,
                         std::span<double> out) {
  const auto& cfg = k.config;
  std::vector<double> ex(k.x.dim()), ey(k.y.dim()), eth(k.theta.dim());
  k.x.embed(bounded_argument(grid_unit(p.x, width), cfg.x.domain), ex);
  k.y.embed(bounded_argument(grid_unit(p.y, width), cfg.y.domain), ey);
  k.theta.embed(angle_argument(p.theta, cfg.theta.domain), eth);
  kron3(ex, ey, eth, out);
}

Descriptor assemble(const RawBlocks& blocks, Variant variant, CombineMode mode) {
  Descriptor d;
  d.variant = variant;
  d.degenerate = blocks.degenerate;
  switch (variant) {
    case Variant::polar:
      d.values = blocks.polar;
      break;
    case Variant::cartesian:
      d.values = blocks.cartesian;
      break;
    case Variant::combined: {
      std::vector<double> polar = blocks.polar;
      std::vector<double> cart = blocks.cartesian;
      if (mode == CombineMode::block_normalized) {
        normalize_in_place(polar);
        normalize_in_place(cart);
      }
      d.values = std::move(polar);
      d.values.insert(d.values.end(), cart.begin(), cart.end());
      break;
    }
    case Variant::postprocessed:
      throw std::invalid_argument("raw blocks cannot be assembled into a post-processed descriptor");
  }
  if (d.degenerate) {
    std::fill(d.values.begin(), d.values.end(), 0.0);
  } else {
    normalize_in_place(d.values);
  }
  return d;
}

struct DescriptorExtractor::Geometry {
  int width = 0;
  int polar_spatial_dim = 0;
  int cart_spatial_dim = 0;
  std::vector<double> g;
  std::vector<double> cos_phi;
  std::vector<double> sin_phi;
  std::vector<double> polar_spatial;  // per pixel: psi_phi (x) psi_rho
  std::vector<double> cart_spatial;   // per pixel: psi_x (x) psi_y
};

DescriptorExtractor::DescriptorExtractor(const DescriptorConfig& cfg) : kernels_(cfg) {}

DescriptorExtractor::~DescriptorExtractor() = default;

void DescriptorExtractor::prepare(int width) const { (void)geometry(width); }

std::shared_ptr<const DescriptorExtractor::Geometry> DescriptorExtractor::geometry(int width) const {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(width);
    if (it != cache_.end()) return it->second;
  }

  const auto& cfg = kernels_.config;
  auto geo = std::make_shared<Geometry>();
  geo->width = width;
  geo->polar_spatial_dim = kernels_.phi.dim() * kernels_.rho.dim();
  geo->cart_spatial_dim = kernels_.x.dim() * kernels_.y.dim();
  const std::size_t n = static_cast<std::size_t>(width) * width;
  geo->g.resize(n);
  geo->cos_phi.resize(n);
  geo->sin_phi.resize(n);
  geo->polar_spatial.resize(n * geo->polar_spatial_dim);
  geo->cart_spatial.resize(n * geo->cart_spatial_dim);

  std::vector<double> ephi(kernels_.phi.dim()), erho(kernels_.rho.dim());
  std::vector<double> ex(kernels_.x.dim()), ey(kernels_.y.dim());
  std::size_t i = 0;
  for (int y = 1; y <= width; ++y) {
    for (int x = 1; x <= width; ++x, ++i) {
      const PixelAttributes a = make_attributes(x, y, width, 0.0, 0.0);
      geo->g[i] = a.g;
      geo->cos_phi[i] = std::cos(a.phi);
      geo->sin_phi[i] = std::sin(a.phi);
      kernels_.phi.embed(angle_argument(a.phi, cfg.phi.domain), ephi);
      kernels_.rho.embed(bounded_argument(a.rho, cfg.rho.domain), erho);
      kron2(ephi, erho, std::span(geo->polar_spatial).subspan(i * geo->polar_spatial_dim, geo->polar_spatial_dim));
      kernels_.x.embed(bounded_argument(grid_unit(x, width), cfg.x.domain), ex);
      kernels_.y.embed(bounded_argument(grid_unit(y, width), cfg.y.domain), ey);
      kron2(ex, ey, std::span(geo->cart_spatial).subspan(i * geo->cart_spatial_dim, geo->cart_spatial_dim));
    }
  }

  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto [it, inserted] = cache_.emplace(width, std::move(geo));
  return it->second;
}

RawBlocks DescriptorExtractor::aggregate(const Patch& patch) const {
  const auto geo = geometry(patch.width());
  const auto& cfg = kernels_.config;
  const int w = patch.width();
  const int dtr = kernels_.theta_rel.dim();
  const int dth = kernels_.theta.dim();
  const bool half_tr = cfg.theta_rel.domain == EmbeddingDomain::half_period;
  const bool half_th = cfg.theta.domain == EmbeddingDomain::half_period;

  RawBlocks out;
  out.polar.assign(static_cast<std::size_t>(geo->polar_spatial_dim) * dtr, 0.0);
  out.cartesian.assign(static_cast<std::size_t>(geo->cart_spatial_dim) * dth, 0.0);

  std::vector<double> etr(dtr), eth(dth);
  const std::span<const double> img = patch.intensities();
  bool any_gradient = false;
  std::size_t i = 0;
  for (int y = 1; y <= w; ++y) {
    const std::size_t row = static_cast<std::size_t>(y - 1) * w;
    const std::size_t up = static_cast<std::size_t>(std::max(y - 2, 0)) * w;
    const std::size_t down = static_cast<std::size_t>(std::min(y, w - 1)) * w;
    for (int x = 1; x <= w; ++x, ++i) {
      const std::size_t left = static_cast<std::size_t>(std::max(x - 2, 0));
      const std::size_t right = static_cast<std::size_t>(std::min(x, w - 1));
      const double gx = img[row + right] - img[row + left];
      const double gy = img[down + x - 1] - img[up + x - 1];
      const double m = std::hypot(gx, gy);
      if (!(m > 0.0)) continue;
      any_gradient = true;

      const double weight = geo->g[i] * std::sqrt(m);
      double ct = gx / m;
      double st = gy / m;
      // theta_rel = theta - phi by angle subtraction.
      double cr = ct * geo->cos_phi[i] + st * geo->sin_phi[i];
      double sr = st * geo->cos_phi[i] - ct * geo->sin_phi[i];
      if (half_tr) {
        const double a = 0.5 * wrap_angle(std::atan2(sr, cr));
        cr = std::cos(a);
        sr = std::sin(a);
      }
      if (half_th) {
        const double a = 0.5 * wrap_angle(std::atan2(st, ct));
        ct = std::cos(a);
        st = std::sin(a);
      }
      kernels_.theta_rel.embed(cr, sr, etr);
      kernels_.theta.embed(ct, st, eth);
      for (double& v : etr) v *= weight;
      for (double& v : eth) v *= weight;

      const double* ps = geo->polar_spatial.data() + i * geo->polar_spatial_dim;
      double* dst = out.polar.data();
      for (int s = 0; s < geo->polar_spatial_dim; ++s) {
        const double sv = ps[s];
        for (int t = 0; t < dtr; ++t) dst[t] += sv * etr[t];
        dst += dtr;
      }
      const double* cs = geo->cart_spatial.data() + i * geo->cart_spatial_dim;
      dst = out.cartesian.data();
      for (int s = 0; s < geo->cart_spatial_dim; ++s) {
        const double sv = cs[s];
        for (int t = 0; t < dth; ++t) dst[t] += sv * eth[t];
        dst += dth;
      }
    }
  }
  out.degenerate = !any_gradient;
  return out;
}

Descriptor DescriptorExtractor::describe(const Patch& patch, Variant variant) const {
  return assemble(aggregate(patch), variant, kernels_.config.combine);
}

}  // namespace kpd
