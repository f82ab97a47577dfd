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

#include "kpd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "kpd/error.hpp"

namespace kpd {

std::vector<double> pixel_embedding(const PixelAttributes& p, int width, Variant parametrization,
                                    const DescriptorKernels& kernels, bool weighted) {
  const auto& cfg = kernels.config;
  std::vector<double> out;
  switch (parametrization) {
    case Variant::polar:
      out.resize(static_cast<std::size_t>(cfg.polar_dim()));
      polar_embedding(p, kernels, out);
      break;
    case Variant::cartesian:
      out.resize(static_cast<std::size_t>(cfg.cartesian_dim()));
      cartesian_embedding(p, width, kernels, out);
      break;
    case Variant::combined: {
      out.resize(static_cast<std::size_t>(cfg.polar_dim() + cfg.cartesian_dim()));
      std::span<double> all(out);
      polar_embedding(p, kernels, all.first(cfg.polar_dim()));
      cartesian_embedding(p, width, kernels, all.subspan(cfg.polar_dim()));
      break;
    }
    case Variant::postprocessed:
      throw std::invalid_argument("pixel embeddings exist only for raw parametrizations");
  }
  if (weighted) {
    const double w = p.g * std::sqrt(p.m);
    for (double& v : out) v *= w;
  }
  return out;
}

double pixel_similarity(const PixelAttributes& p, const PixelAttributes& q, int width, Variant parametrization,
                        const DescriptorKernels& kernels, bool weighted) {
  const auto ep = pixel_embedding(p, width, parametrization, kernels, weighted);
  const auto eq = pixel_embedding(q, width, parametrization, kernels, weighted);
  double s = 0.0;
  for (std::size_t i = 0; i < ep.size(); ++i) s += ep[i] * eq[i];
  return s;
}

namespace {

void check_linear(const WhiteningModel& model, int dim) {
  if (!model.is_linear()) {
    throw std::invalid_argument("non-linear post-processing has no pixel-level similarity");
  }
  if (model.input_dim() != dim) {
    throw std::invalid_argument("whitening model does not match the parametrization dimension");
  }
}

Eigen::VectorXd project(const WhiteningModel& model, const std::vector<double>& e) {
  return model.projection.transpose() * Eigen::Map<const Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
}

}  // namespace

double whitened_pixel_similarity(const PixelAttributes& p, const PixelAttributes& q, int width,
                                 Variant parametrization, const DescriptorKernels& kernels,
                                 const WhiteningModel& model, bool weighted) {
  const auto ep = pixel_embedding(p, width, parametrization, kernels, weighted);
  const auto eq = pixel_embedding(q, width, parametrization, kernels, weighted);
  check_linear(model, static_cast<int>(ep.size()));
  const Eigen::VectorXd ap = project(model, ep);
  const Eigen::VectorXd aq = project(model, eq);
  const Eigen::VectorXd am = model.projection.transpose() * model.mean;
  return ap.dot(aq) - ap.dot(am) - aq.dot(am);
}

PatchMap patch_map(const Probe& probe, double q_theta, int width, Variant parametrization,
                   const DescriptorKernels& kernels, const WhiteningModel* model) {
  if (probe.x < 1 || probe.x > width || probe.y < 1 || probe.y > width) {
    throw std::out_of_range("probe pixel lies outside the patch");
  }
  PatchMap map;
  map.width = width;
  map.parametrization = parametrization;
  map.probe = probe;
  map.q_theta = q_theta;
  map.whitened = model != nullptr;
  map.values.resize(static_cast<std::size_t>(width) * width);

  const PixelAttributes pa = make_attributes(probe.x, probe.y, width, probe.theta, 1.0);
  const auto ep = pixel_embedding(pa, width, parametrization, kernels, true);

  Eigen::VectorXd ap, am;
  if (model) {
    check_linear(*model, static_cast<int>(ep.size()));
    ap = project(*model, ep);
    am = model->projection.transpose() * model->mean;
  }
  const double p_mean = model ? ap.dot(am) : 0.0;

  std::size_t i = 0;
  for (int y = 1; y <= width; ++y) {
    for (int x = 1; x <= width; ++x, ++i) {
      const PixelAttributes qa = make_attributes(x, y, width, q_theta, 1.0);
      const auto eq = pixel_embedding(qa, width, parametrization, kernels, true);
      if (model) {
        const Eigen::VectorXd aq = project(*model, eq);
        map.values[i] = ap.dot(aq) - p_mean - aq.dot(am);
      } else {
        double s = 0.0;
        for (std::size_t k = 0; k < ep.size(); ++k) s += ep[k] * eq[k];
        map.values[i] = s;
      }
    }
  }
  return map;
}

std::vector<double> slice_1d(const PatchMap& map, SliceAxis axis, int index) {
  if (index < 1 || index > map.width) throw std::out_of_range("slice index outside the patch map");
  std::vector<double> out(static_cast<std::size_t>(map.width));
  for (int k = 1; k <= map.width; ++k) {
    out[static_cast<std::size_t>(k - 1)] = axis == SliceAxis::row ? map.at(k, index) : map.at(index, k);
  }
  return out;
}

HeatMaps pair_heat_map(const Patch& p, const Patch& q, Variant parametrization, const DescriptorKernels& kernels,
                       const WhiteningModel* model) {
  if (p.width() != q.width()) throw std::invalid_argument("heat maps need patches of equal size");
  const int w = p.width();
  const auto attrs_p = pixel_attributes(p);
  const auto attrs_q = pixel_attributes(q);
  const int dim = parametrization == Variant::combined ? kernels.config.dim(Variant::combined)
                                                       : kernels.config.dim(parametrization);
  if (model) check_linear(*model, dim);

  // Embedded (and projected, when whitened) pixels as rows.
  auto embed_all = [&](const std::vector<PixelAttributes>& attrs) {
    RowMatrix rows(static_cast<Eigen::Index>(attrs.size()), dim);
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      const auto e = pixel_embedding(attrs[i], w, parametrization, kernels, true);
      rows.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(e.data(), dim);
    }
    if (model) return RowMatrix(rows * model->projection);
    return rows;
  };
  const RowMatrix ep = embed_all(attrs_p);
  const RowMatrix eq = embed_all(attrs_q);
  const Eigen::VectorXd sum_p = ep.colwise().sum().transpose();
  const Eigen::VectorXd sum_q = eq.colwise().sum().transpose();

  HeatMaps out;
  out.width = w;
  const Eigen::VectorXd on_p = ep * sum_q;
  const Eigen::VectorXd on_q = eq * sum_p;
  out.on_p.assign(on_p.data(), on_p.data() + on_p.size());
  out.on_q.assign(on_q.data(), on_q.data() + on_q.size());
  if (model) {
    const Eigen::VectorXd am = model->projection.transpose() * model->mean;
    const Eigen::VectorXd p_mean = ep * am;
    const Eigen::VectorXd q_mean = eq * am;
    const double n_p = static_cast<double>(ep.rows());
    const double n_q = static_cast<double>(eq.rows());
    const double total_p_mean = p_mean.sum();
    const double total_q_mean = q_mean.sum();
    for (std::size_t i = 0; i < out.on_p.size(); ++i) out.on_p[i] -= n_q * p_mean(i) + total_q_mean;
    for (std::size_t i = 0; i < out.on_q.size(); ++i) out.on_q[i] -= n_p * q_mean(i) + total_p_mean;
  }
  return out;
}

double SimilarityHistograms::overlap() const {
  std::size_t np = 0, nn = 0;
  for (auto c : positive) np += c;
  for (auto c : negative) nn += c;
  if (np == 0 || nn == 0) return 0.0;
  double s = 0.0;
  for (std::size_t b = 0; b < positive.size(); ++b) {
    s += std::min(static_cast<double>(positive[b]) / np, static_cast<double>(negative[b]) / nn);
  }
  return s;
}

SimilarityHistograms similarity_histograms(std::span<const double> positive, std::span<const double> negative,
                                           int bins, double lo, double hi) {
  if (positive.empty() || negative.empty()) throw std::invalid_argument("histograms need positive and negative pairs");
  if (bins < 1 || !(hi > lo)) throw std::invalid_argument("invalid histogram binning");
  SimilarityHistograms h;
  h.lo = lo;
  h.hi = hi;
  h.positive.assign(static_cast<std::size_t>(bins), 0);
  h.negative.assign(static_cast<std::size_t>(bins), 0);
  auto bin_of = [&](double v) {
    const double f = (v - lo) / (hi - lo) * bins;
    return static_cast<std::size_t>(std::clamp(static_cast<long>(std::floor(f)), 0L, static_cast<long>(bins - 1)));
  };
  for (double v : positive) ++h.positive[bin_of(v)];
  for (double v : negative) ++h.negative[bin_of(v)];
  return h;
}

void write_map_csv(const std::filesystem::path& path, std::span<const double> values, int width) {
  std::ofstream out(path);
  if (!out) throw InputFormatError("cannot open " + path.string() + " for writing");
  char buf[32];
  for (int y = 0; y < width; ++y) {
    for (int x = 0; x < width; ++x) {
      std::snprintf(buf, sizeof(buf), "%.17g", values[static_cast<std::size_t>(y) * width + x]);
      out << (x ? "," : "") << buf;
    }
    out << '\n';
  }
}

void write_vector_csv(const std::filesystem::path& path, std::span<const double> values) {
  std::ofstream out(path);
  if (!out) throw InputFormatError("cannot open " + path.string() + " for writing");
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
    out << (i ? "," : "") << buf;
  }
  out << '\n';
}

void write_map_pgm(const std::filesystem::path& path, std::span<const double> values, int width) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputFormatError("cannot open " + path.string() + " for writing");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = values.empty() ? 0.0 : *mn;
  const double range = values.empty() ? 0.0 : *mx - lo;
  out << "P5\n" << width << ' ' << width << "\n255\n";
  for (double v : values) {
    const double f = range > 0.0 ? (v - lo) / range : 0.0;
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(f, 0.0, 1.0) * 255.0))));
  }
}

std::string map_file_stem(const PatchMap& map) {
  return "map_" + std::to_string(map.probe.x) + "_" + std::to_string(map.probe.y) + "_" +
         std::to_string(std::lround(map.probe.theta * 1000.0)) + "_" + std::to_string(std::lround(map.q_theta * 1000.0));
}

}  // namespace kpd
