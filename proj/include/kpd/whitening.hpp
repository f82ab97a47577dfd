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

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

#include "kpd/descriptor.hpp"

namespace kpd {

// Numeric values are the variant codes of the KPWM container.
enum class WhiteningVariant : std::uint8_t {
  supervised = 0,  // W_S
  pca = 1,         // W
  attenuated = 2,  // W_UA
  shrinkage = 3,   // W_US
  pca_sqrt = 4,    // PCA rotation + signed square root
};

std::string_view to_string(WhiteningVariant v);
// CLI names: ws | w | wua | wus | pcasqrt.
WhiteningVariant parse_whitening_variant(std::string_view name);

inline constexpr double kDefaultAttenuation = 0.7;
inline constexpr int kDefaultShrinkIndex = 40;
inline constexpr int kDefaultOutputDim = 128;

/// Sample mean and population (1/n) covariance of a descriptor collection.
struct DescriptorStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::size_t count = 0;

  int dim() const { return static_cast<int>(mean.size()); }
};

/// Mergeable (count, mean, centred scatter) accumulator. Blocks are reduced
/// with the pairwise update of Chan et al., so partial accumulators built on
/// disjoint shards can be merged in any order.
class StatsAccumulator {
 public:
  explicit StatsAccumulator(int dim);

  void add(std::span<const double> sample);
  void add_rows(const RowMatrix& rows);
  void merge(const StatsAccumulator& other);

  std::size_t count() const { return count_; }
  // Throws std::invalid_argument with fewer than 2 samples.
  DescriptorStats finalize() const;

 private:
  std::size_t count_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd scatter_;
};

DescriptorStats estimate_stats(const RowMatrix& descriptors);

/// Intraclass covariance (1/|M|) sum (V(P) - V(Q))(V(P) - V(Q))^T.
struct IntraclassStats {
  Eigen::MatrixXd cov;
  std::size_t pairs = 0;
};

using IndexPair = std::pair<std::size_t, std::size_t>;

IntraclassStats intraclass_covariance(const RowMatrix& descriptors, std::span<const IndexPair> pairs);
// Row i of `first` matches row i of `second`.
IntraclassStats intraclass_covariance(const RowMatrix& first, const RowMatrix& second);

/// Eigenpairs in descending eigenvalue order. Each eigenvector is signed so
/// its largest-magnitude component is positive (first such index on ties).
struct SymmetricEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};
SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& symmetric);

/// Symmetric inverse square root with ridge eps = rel_ridge * trace / d added
/// to every eigenvalue. Throws NumericalError when an eigenvalue stays <= 0.
Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& spd, double rel_ridge = 1e-10);

/// Inverse square root restricted to the numerical range of a PSD matrix:
/// eigenvalues at or below 1e-14 of the largest get weight 0, the rest
/// lambda^{-1/2} with no ridge. Throws NumericalError for a non-positive trace.
struct RangeInverseSqrt {
  Eigen::MatrixXd matrix;
  int rank = 0;
};
RangeInverseSqrt range_inverse_sqrt(const Eigen::MatrixXd& psd);

struct WhiteningModel {
  WhiteningVariant variant = WhiteningVariant::pca;
  Eigen::VectorXd mean;        // d_in
  Eigen::MatrixXd projection;  // d_in x d_out
  double t = 1.0;              // attenuation extent (W_UA)
  int shrink_index = 0;        // 1-based eigenvalue index (W_US), 0 if beta was given directly
  double beta = 0.0;           // shrinkage weight (W_US)

  int input_dim() const { return static_cast<int>(projection.rows()); }
  int output_dim() const { return static_cast<int>(projection.cols()); }
  bool is_linear() const { return variant != WhiteningVariant::pca_sqrt; }
};

// All fitters throw std::invalid_argument when d_out is not in [1, d_in] and
// NumericalError when a retained eigenvalue is not positive (eigenvalues at
// or below 1e-14 of the largest count as zero).

/// A = C_M^{-1/2} eig(C_M^{-1/2} C C_M^{-1/2}), top d_out eigenvectors. Column
/// signs make A^T mu non-negative (falling back to the eigenvector convention
/// when A^T mu vanishes), which keeps the model covariant under rescaling
/// of descriptor blocks. C_M^{-1/2} is range_inverse_sqrt; d_out above the
/// rank of C_M throws NumericalError.
WhiteningModel fit_supervised(const DescriptorStats& stats, const IntraclassStats& intra, int d_out);

/// A = eig(C) diag(lambda^{-1/2}).
WhiteningModel fit_pca_whitening(const DescriptorStats& stats, int d_out);

/// A = eig(C) diag(lambda^{-t/2}), t in [0,1].
WhiteningModel fit_attenuated(const DescriptorStats& stats, double t, int d_out);

/// A = eig(C) diag((alpha lambda + beta)^{-1/2}), beta = lambda_i, alpha = 1 - beta.
WhiteningModel fit_shrinkage(const DescriptorStats& stats, int shrink_index, int d_out);
WhiteningModel fit_shrinkage_beta(const DescriptorStats& stats, double beta, int d_out);

/// Rotation onto the top d_out principal axes; apply() adds a signed square root.
WhiteningModel fit_pca_sqrt(const DescriptorStats& stats, int d_out);

/// A^T (v - mu), signed square root for pca_sqrt, then l2 normalization.
/// Degenerate inputs map to the zero vector. Throws std::invalid_argument on
/// a dimension mismatch.
Descriptor apply(const WhiteningModel& model, const Descriptor& d);
DescriptorSet apply(const WhiteningModel& model, const DescriptorSet& set);
RowMatrix apply_rows(const WhiteningModel& model, const RowMatrix& rows);

}  // namespace kpd
