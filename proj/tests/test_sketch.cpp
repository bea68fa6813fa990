#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "error.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "sketch.hpp"

using namespace drp;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("drp_test_" + name);
}

}  // namespace

TEST(GaussianMatrix, MeanWithinFourSigma) {
  const auto r = gaussian_matrix(1000, 100, 5);
  EXPECT_LE(std::abs(r.mean()), 0.0127);
}

TEST(GaussianMatrix, VarianceNearOne) {
  const auto r = gaussian_matrix(500, 500, 1);
  const double mean = r.mean();
  const double var = (r.array() - mean).square().sum() / (r.size() - 1);
  EXPECT_GE(var, 0.98);
  EXPECT_LE(var, 1.02);
}

TEST(GaussianMatrix, Deterministic) {
  EXPECT_TRUE(gaussian_matrix(2, 2, 7) == gaussian_matrix(2, 2, 7));
  EXPECT_FALSE(gaussian_matrix(2, 2, 7) == gaussian_matrix(2, 2, 8));
  EXPECT_THROW(gaussian_matrix(0, 2, 1), InvalidArgument);
  EXPECT_THROW(gaussian_matrix(2, 0, 1), InvalidArgument);
}

TEST(GaussianMatrix, PinnedGeneratorOutput) {
  // Guards the documented sampler against silent changes.
  NormalSampler a(42, Stream::kSketch);
  NormalSampler b(42, Stream::kSketch);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
  const auto r = gaussian_matrix(3, 2, 42);
  NormalSampler c(42, Stream::kSketch);
  for (Eigen::Index j = 0; j < 2; ++j) {
    for (Eigen::Index i = 0; i < 3; ++i) EXPECT_EQ(r(i, j), c());
  }
  EXPECT_EQ(NormalSampler::kVersion, 1);
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Project, IdentityInjectionGivesIdentity) {
  Eigen::VectorXd y(2);
  y << 1, -1;
  const Dataset data(Eigen::MatrixXd::Identity(2, 2), y);
  const auto s = project(data, std::sqrt(2.0) * Eigen::MatrixXd::Identity(2, 2), 2, kInjectedSeed);
  EXPECT_LE((s.sketched_features - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-15);
}

TEST(Project, ZeroMatrixGivesZero) {
  const auto data = make_low_rank(6, 4, 2, LabelRule::kRandom, 3);
  const auto s = project(data, Eigen::MatrixXd::Zero(6, 3), 3, kInjectedSeed);
  EXPECT_EQ(s.sketched_features.norm(), 0.0);
}

TEST(Project, RejectsMismatchedMatrix) {
  const auto data = make_low_rank(6, 4, 2, LabelRule::kRandom, 3);
  EXPECT_THROW(project(data, Eigen::MatrixXd::Zero(5, 3), 3, 0), DimensionMismatch);
  EXPECT_THROW(project(data, Eigen::MatrixXd::Zero(6, 3), 4, 0), DimensionMismatch);
}

TEST(Project, RecomputationInvariant) {
  const auto data = make_low_rank(40, 15, 4, LabelRule::kRandom, 9);
  const auto s = make_sketch(data, 12, 77);
  const Eigen::MatrixXd expected = s.matrix_r.transpose() * data.features() / std::sqrt(12.0);
  EXPECT_LE((s.sketched_features - expected).norm(), 1e-12 * expected.norm());
  EXPECT_TRUE(s.matrix_r == gaussian_matrix(40, 12, 77));
  EXPECT_EQ(s.m, 12);
  EXPECT_EQ(s.seed, 77u);
}

TEST(Project, JohnsonLindenstraussNorms) {
  const Eigen::Index d = 300;
  const Eigen::Index m = 200;
  NormalSampler rng(123, Stream::kFactorLeft);
  const Eigen::MatrixXd x = rng.matrix(d, 100);
  const Dataset data(x, Eigen::VectorXd::Ones(100));
  const auto s = make_sketch(data, m, 4);
  int failures = 0;
  for (Eigen::Index i = 0; i < 100; ++i) {
    const double ratio = s.sketched_features.col(i).squaredNorm() / x.col(i).squaredNorm();
    if (ratio < 0.5 || ratio > 1.5) ++failures;
  }
  EXPECT_LE(failures, 5);
}

TEST(Project, UnbiasedInExpectation) {
  const auto data = make_low_rank(10, 10, 10, LabelRule::kRandom, 5);
  const Eigen::MatrixXd target = data.features().transpose() * data.features();
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(10, 10);
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    const auto sk = make_sketch(data, 10, 1000 + s);
    mean += sk.sketched_features.transpose() * sk.sketched_features;
  }
  mean /= seeds;
  for (Eigen::Index i = 0; i < 10; ++i) {
    for (Eigen::Index j = 0; j < 10; ++j) {
      const double scale = data.features().col(i).norm() * data.features().col(j).norm();
      EXPECT_LE(std::abs(mean(i, j) - target(i, j)), 5.0 / std::sqrt(200.0) * scale);
    }
  }
}

TEST(SketchFile, RoundTrip) {
  const auto data = make_low_rank(7, 5, 2, LabelRule::kRandom, 1);
  const auto s = make_sketch(data, 3, 0x1234567890abcdefULL);
  const auto path = temp_path("sketch.bin");
  save_sketch_matrix(s, path);
  EXPECT_EQ(std::filesystem::file_size(path), 16u + 7u * 3u * 8u);
  const auto back = load_sketch_matrix(path);
  EXPECT_TRUE(back.matrix_r == s.matrix_r);
  EXPECT_EQ(back.seed_low, 0x90abcdefu);
  std::filesystem::remove(path);
}

TEST(SketchFile, RejectsCorruptFiles) {
  const auto path = temp_path("bad.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOPE0000000000000000";
  }
  EXPECT_THROW(load_sketch_matrix(path), IoError);
  {
    const auto data = make_low_rank(4, 4, 2, LabelRule::kRandom, 1);
    save_sketch_matrix(make_sketch(data, 2, 1), path);
    std::filesystem::resize_file(path, 30);
  }
  EXPECT_THROW(load_sketch_matrix(path), IoError);
  std::filesystem::remove(path);
  EXPECT_THROW(load_sketch_matrix(path), IoError);
}
