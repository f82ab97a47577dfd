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

#include "kpd/whitening.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "kpd/error.hpp"

namespace kpd {

std::string_view to_string(WhiteningVariant v) {
  switch (v) {
    case WhiteningVariant::supervised: return "ws";
    case WhiteningVariant::pca: return "w";
    case WhiteningVariant::attenuated: return "wua";
    case WhiteningVariant::shrinkage: return "wus";
    case WhiteningVariant::pca_sqrt: return "pcasqrt";
  }
  return "unknown";
}

WhiteningVariant parse_whitening_variant(std::string_view name) {
  if (name == "ws") return WhiteningVariant::supervised;
  if (name == "w") return WhiteningVariant::pca;
  if (name == "wua") return WhiteningVariant::attenuated;
  if (name == "wus") return WhiteningVariant::shrinkage;
  if (name == "pcasqrt") return WhiteningVariant::pca_sqrt;
  throw std::invalid_argument("unknown whitening variant '" + std::string(name) + "'");
}

StatsAccumulator::StatsAccumulator(int dim)
    : mean_(Eigen::VectorXd::Zero(dim)), scatter_(Eigen::MatrixXd::Zero(dim, dim)) {}

void StatsAccumulator::add(std::span<const double> sample) {
  if (static_cast<Eigen::Index>(sample.size()) != mean_.size()) {
    throw std::invalid_argument("sample dimension does not match accumulator");
  }
  const Eigen::Map<const Eigen::VectorXd> x(sample.data(), mean_.size());
  ++count_;
  const Eigen::VectorXd delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  scatter_.noalias() += delta * (x - mean_).transpose();
}

void StatsAccumulator::add_rows(const RowMatrix& rows) {
  if (rows.rows() == 0) return;
  if (rows.cols() != mean_.size()) throw std::invalid_argument("sample dimension does not match accumulator");
  StatsAccumulator block(static_cast<int>(mean_.size()));
  block.count_ = static_cast<std::size_t>(rows.rows());
  block.mean_ = rows.colwise().mean().transpose();
  const RowMatrix centred = rows.rowwise() - block.mean_.transpose();
  block.scatter_.noalias() = centred.transpose() * centred;
  merge(block);
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
  if (other.mean_.size() != mean_.size()) throw std::invalid_argument("accumulator dimensions differ");
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  const Eigen::VectorXd delta = other.mean_ - mean_;
  mean_ += delta * (nb / n);
  scatter_ += other.scatter_;
  scatter_.noalias() += (na * nb / n) * (delta * delta.transpose());
  count_ += other.count_;
}

DescriptorStats StatsAccumulator::finalize() const {
  if (count_ < 2) throw std::invalid_argument("covariance estimation needs at least 2 samples");
  DescriptorStats s;
  s.mean = mean_;
  s.cov = 0.5 * (scatter_ + scatter_.transpose()) / static_cast<double>(count_);
  s.count = count_;
  return s;
}

DescriptorStats estimate_stats(const RowMatrix& descriptors) {
  StatsAccumulator acc(static_cast<int>(descriptors.cols()));
  constexpr Eigen::Index kBlock = 256;
  for (Eigen::Index start = 0; start < descriptors.rows(); start += kBlock) {
    const Eigen::Index len = std::min(kBlock, descriptors.rows() - start);
    acc.add_rows(descriptors.middleRows(start, len));
  }
  return acc.finalize();
}

IntraclassStats intraclass_covariance(const RowMatrix& descriptors, std::span<const IndexPair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("intraclass covariance needs at least one matching pair");
  const Eigen::Index d = descriptors.cols();
  RowMatrix diffs(static_cast<Eigen::Index>(pairs.size()), d);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [a, b] = pairs[k];
    if (a >= static_cast<std::size_t>(descriptors.rows()) || b >= static_cast<std::size_t>(descriptors.rows())) {
      throw std::invalid_argument("pair index out of range");
    }
    diffs.row(static_cast<Eigen::Index>(k)) =
        descriptors.row(static_cast<Eigen::Index>(a)) - descriptors.row(static_cast<Eigen::Index>(b));
  }
  IntraclassStats out;
  out.pairs = pairs.size();
  out.cov = (diffs.transpose() * diffs) / static_cast<double>(pairs.size());
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

IntraclassStats intraclass_covariance(const RowMatrix& first, const RowMatrix& second) {
  if (first.rows() != second.rows() || first.cols() != second.cols()) {
    throw std::invalid_argument("matching descriptor blocks must have equal shape");
  }
  if (first.rows() == 0) throw std::invalid_argument("intraclass covariance needs at least one matching pair");
  const RowMatrix diffs = first - second;
  IntraclassStats out;
  out.pairs = static_cast<std::size_t>(first.rows());
  out.cov = (diffs.transpose() * diffs) / static_cast<double>(first.rows());
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

namespace {

void fix_sign_by_largest(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
}

void check_output_dim(int d_out, int d_in) {
  if (d_out < 1 || d_out > d_in) {
    throw std::invalid_argument("output dimension " + std::to_string(d_out) + " not in [1, " +
                                std::to_string(d_in) + "]");
  }
}

void check_retained_positive(const Eigen::VectorXd& values, int d_out) {
  const double top = values.size() > 0 ? values(0) : 0.0;
  const double floor = std::max(top, 0.0) * 1e-14;
  for (int j = 0; j < d_out; ++j) {
    if (!(values(j) > floor)) {
      throw NumericalError("covariance eigenvalue " + std::to_string(j + 1) + " is not positive (" +
                           std::to_string(values(j)) + ")");
    }
  }
}

// eig(C) diag(scale_j), scale_j = f(lambda_j), for the unsupervised family.
template <typename Scale>
WhiteningModel fit_spectral(const DescriptorStats& stats, int d_out, WhiteningVariant variant, Scale scale) {
  check_output_dim(d_out, stats.dim());
  const SymmetricEigen eig = symmetric_eigen(stats.cov);
  check_retained_positive(eig.values, d_out);
  WhiteningModel m;
  m.variant = variant;
  m.mean = stats.mean;
  m.projection = eig.vectors.leftCols(d_out);
  for (int j = 0; j < d_out; ++j) {
    const double f = scale(eig.values(j));
    if (!std::isfinite(f)) throw NumericalError("non-finite whitening factor");
    m.projection.col(j) *= f;
  }
  return m;
}

}  // namespace

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& symmetric) {
  if (symmetric.rows() != symmetric.cols()) throw std::invalid_argument("matrix must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigendecomposition failed");
  const Eigen::Index n = symmetric.rows();
  SymmetricEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index j = 0; j < n; ++j) fix_sign_by_largest(out.vectors.col(j));
  return out;
}

Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& spd, double rel_ridge) {
  const Eigen::Index d = spd.rows();
  if (d == 0) throw std::invalid_argument("empty matrix");
  const double trace = spd.trace();
  if (!(trace > 0.0)) throw NumericalError("matrix has non-positive trace; cannot form inverse square root");
  const SymmetricEigen eig = symmetric_eigen(spd);
  const double ridge = rel_ridge * trace / static_cast<double>(d);
  Eigen::VectorXd scale(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double lam = eig.values(j) + ridge;
    if (!(lam > 0.0)) throw NumericalError("matrix is singular beyond ridge repair");
    scale(j) = 1.0 / std::sqrt(lam);
  }
  Eigen::MatrixXd out = eig.vectors * scale.asDiagonal() * eig.vectors.transpose();
  return 0.5 * (out + out.transpose());
}

RangeInverseSqrt range_inverse_sqrt(const Eigen::MatrixXd& psd) {
  const Eigen::Index d = psd.rows();
  if (d == 0) throw std::invalid_argument("empty matrix");
  if (!(psd.trace() > 0.0)) throw NumericalError("matrix has non-positive trace; cannot form inverse square root");
  const SymmetricEigen eig = symmetric_eigen(psd);
  // A ridge here would perturb the small retained eigenvalues by an amount
  // that does not follow a rescaling of the data; exact null directions
  // (the combined descriptor has several) are dropped instead.
  const double floor = eig.values(0) * 1e-14;
  RangeInverseSqrt out;
  Eigen::VectorXd scale = Eigen::VectorXd::Zero(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (eig.values(j) > floor) {
      scale(j) = 1.0 / std::sqrt(eig.values(j));
      ++out.rank;
    }
  }
  out.matrix = eig.vectors * scale.asDiagonal() * eig.vectors.transpose();
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  return out;
}

WhiteningModel fit_supervised(const DescriptorStats& stats, const IntraclassStats& intra, int d_out) {
  const int d_in = stats.dim();
  check_output_dim(d_out, d_in);
  if (intra.cov.rows() != d_in || intra.cov.cols() != d_in) {
    throw std::invalid_argument("intraclass covariance dimension does not match descriptor statistics");
  }
  const RangeInverseSqrt inv = range_inverse_sqrt(intra.cov);
  if (inv.rank < d_out) {
    throw NumericalError("intraclass covariance has rank " + std::to_string(inv.rank) + ", below output dimension " +
                         std::to_string(d_out));
  }
  const Eigen::MatrixXd& s = inv.matrix;
  Eigen::MatrixXd between = s * stats.cov * s;
  between = 0.5 * (between + between.transpose()).eval();
  const SymmetricEigen eig = symmetric_eigen(between);

  WhiteningModel m;
  m.variant = WhiteningVariant::supervised;
  m.mean = stats.mean;
  m.projection = s * eig.vectors.leftCols(d_out);
  const double mean_norm = stats.mean.norm();
  for (int j = 0; j < d_out; ++j) {
    const double proj = m.projection.col(j).dot(stats.mean);
    if (std::abs(proj) > 1e-12 * m.projection.col(j).norm() * mean_norm) {
      if (proj < 0.0) m.projection.col(j) *= -1.0;
    }
  }
  return m;
}

WhiteningModel fit_pca_whitening(const DescriptorStats& stats, int d_out) {
  return fit_spectral(stats, d_out, WhiteningVariant::pca, [](double lam) { return 1.0 / std::sqrt(lam); });
}

WhiteningModel fit_attenuated(const DescriptorStats& stats, double t, int d_out) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("attenuation t must lie in [0,1]");
  WhiteningModel m = fit_spectral(stats, d_out, WhiteningVariant::attenuated,
                                  [t](double lam) { return std::pow(lam, -0.5 * t); });
  m.t = t;
  return m;
}

WhiteningModel fit_shrinkage_beta(const DescriptorStats& stats, double beta, int d_out) {
  if (!std::isfinite(beta) || beta < 0.0) throw std::invalid_argument("shrinkage beta must be non-negative");
  const double alpha = 1.0 - beta;
  WhiteningModel m = fit_spectral(stats, d_out, WhiteningVariant::shrinkage, [alpha, beta](double lam) {
    const double shrunk = alpha * lam + beta;
    if (!(shrunk > 0.0)) throw NumericalError("shrunk eigenvalue is not positive");
    return 1.0 / std::sqrt(shrunk);
  });
  m.beta = beta;
  return m;
}

WhiteningModel fit_shrinkage(const DescriptorStats& stats, int shrink_index, int d_out) {
  if (shrink_index < 1 || shrink_index > stats.dim()) {
    throw std::invalid_argument("shrink index " + std::to_string(shrink_index) + " not in [1, " +
                                std::to_string(stats.dim()) + "]");
  }
  const SymmetricEigen eig = symmetric_eigen(stats.cov);
  const double beta = std::max(0.0, eig.values(shrink_index - 1));
  WhiteningModel m = fit_shrinkage_beta(stats, beta, d_out);
  m.shrink_index = shrink_index;
  return m;
}

WhiteningModel fit_pca_sqrt(const DescriptorStats& stats, int d_out) {
  WhiteningModel m = fit_spectral(stats, d_out, WhiteningVariant::pca_sqrt, [](double) { return 1.0; });
  return m;
}

namespace {

void project_into(const WhiteningModel& model, const Eigen::Ref<const Eigen::VectorXd>& v,
                  Eigen::Ref<Eigen::VectorXd> out) {
  out.noalias() = model.projection.transpose() * (v - model.mean);
  if (model.variant == WhiteningVariant::pca_sqrt) {
    for (Eigen::Index j = 0; j < out.size(); ++j) {
      const double x = out(j);
      out(j) = std::copysign(std::sqrt(std::abs(x)), x);
    }
  }
  const double norm = out.norm();
  if (norm > 0.0) out /= norm;
}

void check_input_dim(const WhiteningModel& model, Eigen::Index dim) {
  if (dim != model.input_dim()) {
    throw std::invalid_argument("descriptor dimension " + std::to_string(dim) +
                                " does not match whitening input dimension " +
                                std::to_string(model.input_dim()));
  }
}

}  // namespace

Descriptor apply(const WhiteningModel& model, const Descriptor& d) {
  check_input_dim(model, d.dim());
  Descriptor out;
  out.variant = Variant::postprocessed;
  out.degenerate = d.degenerate;
  out.values.assign(static_cast<std::size_t>(model.output_dim()), 0.0);
  if (d.degenerate) return out;
  const Eigen::Map<const Eigen::VectorXd> v(d.values.data(), d.dim());
  Eigen::Map<Eigen::VectorXd> o(out.values.data(), model.output_dim());
  Eigen::VectorXd tmp(model.output_dim());
  project_into(model, v, tmp);
  o = tmp;
  return out;
}

RowMatrix apply_rows(const WhiteningModel& model, const RowMatrix& rows) {
  check_input_dim(model, rows.cols());
  RowMatrix out(rows.rows(), model.output_dim());
  Eigen::VectorXd tmp(model.output_dim());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    project_into(model, rows.row(i).transpose(), tmp);
    out.row(i) = tmp.transpose();
  }
  return out;
}

DescriptorSet apply(const WhiteningModel& model, const DescriptorSet& set) {
  DescriptorSet out;
  out.variant = Variant::postprocessed;
  out.values = apply_rows(model, set.values);
  out.degenerate = set.degenerate;
  out.degenerate.resize(set.size(), 0);
  for (std::size_t i = 0; i < out.degenerate.size(); ++i) {
    if (out.degenerate[i]) out.values.row(static_cast<Eigen::Index>(i)).setZero();
  }
  return out;
}

}  // namespace kpd
