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

// Independent reference computations for the unit and acceptance tests.
// Nothing here calls into the library's geometry or kernel code paths; the
// only shared input is a coefficient vector.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

constexpr double kPi = std::numbers::pi;

// Von Mises Fourier coefficient i of exp(kappa (cos d - 1)) from the modified
// Bessel expansion exp(k cos d) = I0(k) + 2 sum I_i(k) cos(i d).
inline double gamma_bessel(double kappa, int i) {
  const double scale = std::exp(-kappa) * std::cyl_bessel_i(static_cast<double>(i), kappa);
  return i == 0 ? scale : 2.0 * scale;
}

// Plain trapezoid over [-pi, pi) with n nodes.
inline double gamma_trapezoid(double kappa, int i, int n = 100000) {
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    const double d = -kPi + 2.0 * kPi * j / n;
    s += std::exp(kappa * (std::cos(d) - 1.0)) * std::cos(i * d);
  }
  s /= n;
  return i == 0 ? s : 2.0 * s;
}

// Adaptive Gauss-Kronrod (61 points) on [0, pi] using evenness.
inline double gamma_kronrod(double kappa, int i) {
  auto f = [&](double d) { return std::exp(kappa * (std::cos(d) - 1.0)) * std::cos(i * d); };
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, kPi, 15, 1e-15);
  return (i == 0 ? 1.0 : 2.0) * integral / kPi;
}

inline double truncated(const std::vector<double>& gamma, double delta) {
  double s = 0.0;
  for (std::size_t i = 0; i < gamma.size(); ++i) s += gamma[i] * std::cos(static_cast<double>(i) * delta);
  return s;
}

// Row-major W x W intensities, 1-based (x, y) with replicate padding.
struct Image {
  int w = 0;
  std::vector<double> v;
  double at(int x, int y) const {
    x = x < 1 ? 1 : (x > w ? w : x);
    y = y < 1 ? 1 : (y > w ? w : y);
    return v[static_cast<std::size_t>(y - 1) * w + (x - 1)];
  }
};

struct Pixel {
  double x, y, rho, phi, theta, theta_rel, m, g;
};

inline double wrap(double a) {
  const double t = 2.0 * kPi;
  a = std::fmod(a, t);
  return a < 0 ? a + t : a;
}

// Scalar re-derivation of every attribute straight from the definitions.
inline std::vector<Pixel> pixels(const Image& im) {
  std::vector<Pixel> out;
  const double c = (im.w + 1) / 2.0;
  for (int y = 1; y <= im.w; ++y) {
    for (int x = 1; x <= im.w; ++x) {
      Pixel p{};
      const double gx = im.at(x + 1, y) - im.at(x - 1, y);
      const double gy = im.at(x, y + 1) - im.at(x, y - 1);
      p.x = x;
      p.y = y;
      p.m = std::sqrt(gx * gx + gy * gy);
      p.theta = p.m > 0 ? wrap(std::atan2(gy, gx)) : 0.0;
      const double dx = x - c, dy = y - c;
      p.rho = std::min(1.0, std::sqrt(dx * dx + dy * dy) / ((im.w - 1) / 2.0));
      p.phi = (dx == 0 && dy == 0) ? 0.0 : wrap(std::atan2(dy, dx));
      p.theta_rel = wrap(p.theta - p.phi);
      p.g = std::exp(-p.rho * p.rho);
      out.push_back(p);
    }
  }
  return out;
}

struct Gammas {
  std::vector<double> phi, rho, theta_rel, x, y, theta;
};

inline double polar_kernel(const Pixel& p, const Pixel& q, const Gammas& g) {
  return truncated(g.phi, p.phi - q.phi) * truncated(g.rho, kPi * (p.rho - q.rho)) *
         truncated(g.theta_rel, p.theta_rel - q.theta_rel);
}

inline double cartesian_kernel(const Pixel& p, const Pixel& q, int w, const Gammas& g) {
  const double s = kPi / (w - 1);
  return truncated(g.x, s * (p.x - q.x)) * truncated(g.y, s * (p.y - q.y)) * truncated(g.theta, p.theta - q.theta);
}

enum class Kind { polar, cartesian, combined };

// Unnormalized match kernel sum_p sum_q w_p w_q k(p, q), O(n^2).
inline double match_kernel(const Image& a, const Image& b, Kind kind, const Gammas& g) {
  const auto pa = pixels(a);
  const auto pb = pixels(b);
  double s = 0.0;
  for (const Pixel& p : pa) {
    if (p.m == 0) continue;
    for (const Pixel& q : pb) {
      if (q.m == 0) continue;
      const double w = p.g * q.g * std::sqrt(p.m * q.m);
      double k = 0.0;
      if (kind != Kind::cartesian) k += polar_kernel(p, q, g);
      if (kind != Kind::polar) k += cartesian_kernel(p, q, a.w, g);
      s += w * k;
    }
  }
  return s;
}

inline double normalized_match_kernel(const Image& a, const Image& b, Kind kind, const Gammas& g) {
  return match_kernel(a, b, kind, g) / std::sqrt(match_kernel(a, a, kind, g) * match_kernel(b, b, kind, g));
}

inline Image random_image(int w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image im{w, std::vector<double>(static_cast<std::size_t>(w) * w)};
  for (double& v : im.v) v = u(rng);
  return im;
}

// Two-pass mean and population covariance.
inline void two_pass_cov(const std::vector<std::vector<double>>& rows, std::vector<double>& mean,
                         std::vector<std::vector<double>>& cov) {
  const std::size_t n = rows.size(), d = rows.front().size();
  mean.assign(d, 0.0);
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  cov.assign(d, std::vector<double>(d, 0.0));
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
    }
  }
  for (auto& row : cov) {
    for (double& c : row) c /= static_cast<double>(n);
  }
}

// Exhaustive sweep: every distinct score (plus +inf) is a candidate threshold.
inline double fpr_bruteforce(const std::vector<double>& s, const std::vector<std::uint8_t>& match, double recall) {
  std::vector<double> taus(s);
  taus.push_back(INFINITY);
  double pos = 0, neg = 0;
  for (auto m : match) (m ? pos : neg) += 1;
  double best = 1.0;
  for (double tau : taus) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= tau) (match[i] ? tp : fp) += 1;
    }
    if (tp / pos >= recall) best = std::min(best, fp / neg);
  }
  return best;
}

// Per-rank recount: at every relevant rank k, count relevant items in the
// top k from scratch. Ties keep input order.
inline double ap_naive(const std::vector<double>& s, const std::vector<std::uint8_t>& rel) {
  std::vector<std::size_t> order(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  double sum = 0;
  int relevant = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (!rel[order[k]]) continue;
    ++relevant;
    int hits = 0;
    for (std::size_t j = 0; j <= k; ++j) hits += rel[order[j]] ? 1 : 0;
    sum += static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  return sum / relevant;
}

// Expected AP of a uniformly random ranking of n items with R relevant:
// (1/n) [ (R-1)/(n-1) (n - H_n) + H_n ].
inline double chance_ap(int relevant, int n) {
  double h = 0;
  for (int k = 1; k <= n; ++k) h += 1.0 / k;
  if (n == 1) return 1.0;
  return ((relevant - 1.0) / (n - 1.0) * (n - h) + h) / n;
}

}  // namespace oracle
