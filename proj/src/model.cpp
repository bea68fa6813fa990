#include "model.hpp"

#include <cmath>
#include <string>

#include "error.hpp"
#include "rng.hpp"

namespace drp {
namespace {

// Orthonormal rows x cols basis (cols <= rows) from the Householder QR of a
// Gaussian matrix, with column signs fixed so that R has a positive diagonal.
Eigen::MatrixXd random_orthonormal(Eigen::Index rows, Eigen::Index cols, NormalSampler& rng) {
  Eigen::MatrixXd g = rng.matrix(rows, cols);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  const auto& packed = qr.matrixQR();
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (packed(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Eigen::VectorXd labels_from_plant(const Eigen::MatrixXd& features, const Eigen::VectorXd& plant) {
  Eigen::VectorXd scores = features.transpose() * plant;
  Eigen::VectorXd labels(scores.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i) labels[i] = scores[i] >= 0.0 ? 1.0 : -1.0;
  return labels;
}

Eigen::VectorXd random_labels(Eigen::Index n, std::uint64_t seed) {
  NormalSampler rng(seed, Stream::kLabels);
  Eigen::VectorXd labels(n);
  for (Eigen::Index i = 0; i < n; ++i) labels[i] = rng.sign();
  return labels;
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd features, Eigen::VectorXd labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.rows() < 1 || features_.cols() < 1) {
    throw InvalidArgument("dataset needs d >= 1 and n >= 1");
  }
  if (labels_.size() != features_.cols()) {
    throw DimensionMismatch("dataset has " + std::to_string(features_.cols()) + " examples but " +
                            std::to_string(labels_.size()) + " labels");
  }
  for (Eigen::Index i = 0; i < labels_.size(); ++i) {
    if (labels_[i] != 1.0 && labels_[i] != -1.0) {
      throw InvalidArgument("label " + std::to_string(i) + " is not -1 or +1");
    }
  }
}

Problem::Problem(Dataset data, LossSpec loss_spec, double lambda_value)
    : dataset(std::move(data)), loss(loss_spec), lambda(lambda_value) {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
}

Dataset make_low_rank(Eigen::Index d, Eigen::Index n, Eigen::Index r, LabelRule rule,
                      std::uint64_t seed) {
  if (d < 1 || n < 1) throw InvalidArgument("dimensions must be positive");
  if (r < 1 || r > std::min(d, n)) throw InvalidArgument("rank must lie in [1, min(d, n)]");
  NormalSampler left_rng(seed, Stream::kFactorLeft);
  NormalSampler right_rng(seed, Stream::kFactorRight);
  const Eigen::MatrixXd left = left_rng.matrix(d, r);
  const Eigen::MatrixXd right = right_rng.matrix(r, n);
  Eigen::MatrixXd features = left * right;

  Eigen::VectorXd labels;
  if (rule == LabelRule::kSignOfPlant) {
    // The column space of X equals that of the left factor.
    NormalSampler plant_rng(seed, Stream::kPlant);
    Eigen::VectorXd plant = left * plant_rng.matrix(r, 1);
    plant /= plant.norm();
    labels = labels_from_plant(features, plant);
  } else {
    labels = random_labels(n, seed);
  }
  return Dataset(std::move(features), std::move(labels));
}

Dataset make_decaying_spectrum(Eigen::Index d, Eigen::Index n, double decay, std::uint64_t seed,
                               double leading, LabelRule rule, Eigen::Index plant_rank) {
  if (d < 1 || n < 1) throw InvalidArgument("dimensions must be positive");
  if (!(decay > 0.0)) throw InvalidArgument("decay must be positive");
  if (!(leading > 0.0)) throw InvalidArgument("leading singular value must be positive");
  const Eigen::Index k = std::min(d, n);
  if (plant_rank < 0 || plant_rank > k) throw InvalidArgument("plant_rank must lie in [0, min(d, n)]");

  NormalSampler left_rng(seed, Stream::kOrthoLeft);
  NormalSampler right_rng(seed, Stream::kOrthoRight);
  const Eigen::MatrixXd u = random_orthonormal(d, k, left_rng);
  const Eigen::MatrixXd v = random_orthonormal(n, k, right_rng);
  const Eigen::VectorXd sigma = decaying_singular_values(k, decay, leading);
  Eigen::MatrixXd features = u * sigma.asDiagonal() * v.transpose();

  Eigen::VectorXd labels;
  if (rule == LabelRule::kSignOfPlant) {
    const Eigen::Index q = plant_rank == 0 ? k : plant_rank;
    NormalSampler plant_rng(seed, Stream::kPlant);
    Eigen::VectorXd plant = u.leftCols(q) * plant_rng.matrix(q, 1);
    plant /= plant.norm();
    labels = labels_from_plant(features, plant);
  } else {
    labels = random_labels(n, seed);
  }
  return Dataset(std::move(features), std::move(labels));
}

Eigen::VectorXd decaying_singular_values(Eigen::Index count, double decay, double leading) {
  Eigen::VectorXd sigma(count);
  for (Eigen::Index i = 0; i < count; ++i) sigma[i] = leading * std::pow(double(i + 1), -decay);
  return sigma;
}

SpectrumInfo spectrum(const Eigen::MatrixXd& features, double rank_threshold) {
  if (!(rank_threshold >= 0.0)) throw InvalidArgument("rank threshold must be non-negative");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(features, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw DecompositionError("singular value decomposition failed");
  SpectrumInfo info;
  info.singular_values = svd.singularValues();
  info.left_vectors = svd.matrixU();
  info.right_vectors = svd.matrixV();
  const double top = info.singular_values.size() > 0 ? info.singular_values[0] : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < info.singular_values.size(); ++i) {
    if (info.singular_values[i] > rank_threshold * top && info.singular_values[i] > 0.0) ++rank;
  }
  info.rank = rank;
  return info;
}

SpectrumInfo spectrum(const Dataset& data, double rank_threshold) {
  return spectrum(data.features(), rank_threshold);
}

Eigen::MatrixXd gram(const Dataset& data) {
  const Eigen::VectorXd& y = data.labels();
  Eigen::MatrixXd g = data.features().transpose() * data.features();
  g = y.asDiagonal() * g * y.asDiagonal();
  // Symmetrize away the rounding asymmetry of the product.
  return 0.5 * (g + g.transpose());
}

double effective_rank(std::span<const double> singular_values, double lambda, double gamma) {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  const double ratio = lambda / gamma;
  double total = 0.0;
  for (double s : singular_values) {
    if (s < 0.0) throw InvalidArgument("singular values must be non-negative");
    const double s2 = s * s;
    total += s2 / (ratio + s2);
  }
  return total;
}

Eigen::Index numerical_rank(std::span<const double> singular_values, double nu) {
  if (!(nu >= 0.0)) throw InvalidArgument("nu must be non-negative");
  Eigen::Index r = 0;
  // Singular values are non-increasing, so the count of sigma_i > nu is r_nu.
  for (double s : singular_values) {
    if (s > nu) {
      ++r;
    } else {
      break;
    }
  }
  return r;
}

}  // namespace drp
