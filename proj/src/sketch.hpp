#pragma once

#include <cstdint>
#include <filesystem>

#include <Eigen/Dense>

#include "model.hpp"

namespace drp {

// Gaussian random projection of a dataset: sketched = R^T X / sqrt(m).
struct ProjectionSketch {
  Eigen::MatrixXd matrix_r;  // d x m
  Eigen::Index m = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd sketched_features;  // m x n
};

// Seed recorded for sketches built from an injected matrix.
inline constexpr std::uint64_t kInjectedSeed = ~std::uint64_t{0};

// d x m matrix of i.i.d. N(0, 1) entries, reproducible from (d, m, seed).
Eigen::MatrixXd gaussian_matrix(Eigen::Index d, Eigen::Index m, std::uint64_t seed);

ProjectionSketch project(const Dataset& data, Eigen::MatrixXd r_matrix, Eigen::Index m,
                         std::uint64_t seed);

// gaussian_matrix + project.
ProjectionSketch make_sketch(const Dataset& data, Eigen::Index m, std::uint64_t seed);

// Binary sketch file: 16-byte little-endian header
//   bytes 0..3   magic "DRPS"
//   bytes 4..7   d (uint32)
//   bytes 8..11  m (uint32)
//   bytes 12..15 low 32 bits of the seed (uint32)
// followed by the d*m entries of R as float64, column-major.
void save_sketch_matrix(const ProjectionSketch& sketch, const std::filesystem::path& path);

struct SketchFile {
  Eigen::MatrixXd matrix_r;
  std::uint32_t seed_low = 0;
};
SketchFile load_sketch_matrix(const std::filesystem::path& path);

}  // namespace drp
