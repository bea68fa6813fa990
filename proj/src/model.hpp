#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "loss.hpp"

namespace drp {

// Labeled data: features is d x n (one example per column), labels in {-1, +1}.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd features, Eigen::VectorXd labels);

  const Eigen::MatrixXd& features() const { return features_; }
  const Eigen::VectorXd& labels() const { return labels_; }
  Eigen::Index dim() const { return features_.rows(); }
  Eigen::Index size() const { return features_.cols(); }

 private:
  Eigen::MatrixXd features_;
  Eigen::VectorXd labels_;
};

// Thin SVD of the feature matrix. Columns of left/right span min(d, n).
struct SpectrumInfo {
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd left_vectors;
  Eigen::MatrixXd right_vectors;
  Eigen::Index rank = 0;

  // Left singular vectors belonging to the first `rank` singular values.
  auto range_basis() const { return left_vectors.leftCols(rank); }
};

// Regularized ERM: lambda/2 |w|^2 + sum_i loss(y_i x_i^T w).
struct Problem {
  Problem(Dataset data, LossSpec loss, double lambda);

  Dataset dataset;
  LossSpec loss;
  double lambda;
};

enum class LabelRule { kSignOfPlant, kRandom };

inline constexpr double kDefaultRankThreshold = 1e-9;

// Rank-r data from a product of d x r and r x n standard normal factors.
Dataset make_low_rank(Eigen::Index d, Eigen::Index n, Eigen::Index r, LabelRule rule,
                      std::uint64_t seed);

// Planted SVD with sigma_i = leading * i^(-decay) and random orthonormal factors.
// With kSignOfPlant the planted direction is drawn from the span of the first
// `plant_rank` left singular vectors (0 means all of them).
Dataset make_decaying_spectrum(Eigen::Index d, Eigen::Index n, double decay, std::uint64_t seed,
                               double leading = 1.0, LabelRule rule = LabelRule::kRandom,
                               Eigen::Index plant_rank = 0);

// leading * i^(-decay) for i = 1..count: the planted spectrum of the generator above.
Eigen::VectorXd decaying_singular_values(Eigen::Index count, double decay, double leading = 1.0);

SpectrumInfo spectrum(const Dataset& data, double rank_threshold = kDefaultRankThreshold);
SpectrumInfo spectrum(const Eigen::MatrixXd& features, double rank_threshold = kDefaultRankThreshold);

// G = D(y) X^T X D(y).
Eigen::MatrixXd gram(const Dataset& data);

// sum_i sigma_i^2 / (lambda/gamma + sigma_i^2)
double effective_rank(std::span<const double> singular_values, double lambda, double gamma);

// The r with sigma_r > nu >= sigma_{r+1}, sigma beyond the vector taken as 0.
Eigen::Index numerical_rank(std::span<const double> singular_values, double nu);

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace drp
