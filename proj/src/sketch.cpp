#include "sketch.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "error.hpp"
#include "rng.hpp"

namespace drp {
namespace {

constexpr std::array<char, 4> kMagic = {'D', 'R', 'P', 'S'};

static_assert(std::endian::native == std::endian::little,
              "sketch files are written in native byte order, which must be little-endian");

void put_u32(char* dst, std::uint32_t v) { std::memcpy(dst, &v, sizeof v); }

std::uint32_t get_u32(const char* src) {
  std::uint32_t v;
  std::memcpy(&v, src, sizeof v);
  return v;
}

}  // namespace

Eigen::MatrixXd gaussian_matrix(Eigen::Index d, Eigen::Index m, std::uint64_t seed) {
  if (d < 1 || m < 1) throw InvalidArgument("sketch dimensions must be positive");
  NormalSampler rng(seed, Stream::kSketch);
  return rng.matrix(d, m);
}

ProjectionSketch project(const Dataset& data, Eigen::MatrixXd r_matrix, Eigen::Index m,
                         std::uint64_t seed) {
  if (m < 1) throw InvalidArgument("sketch dimension must be positive");
  if (r_matrix.rows() != data.dim() || r_matrix.cols() != m) {
    throw DimensionMismatch("projection matrix is " + std::to_string(r_matrix.rows()) + "x" +
                            std::to_string(r_matrix.cols()) + ", expected " +
                            std::to_string(data.dim()) + "x" + std::to_string(m));
  }
  ProjectionSketch sketch;
  sketch.m = m;
  sketch.seed = seed;
  sketch.sketched_features.noalias() = r_matrix.transpose() * data.features();
  sketch.sketched_features /= std::sqrt(static_cast<double>(m));
  sketch.matrix_r = std::move(r_matrix);
  return sketch;
}

ProjectionSketch make_sketch(const Dataset& data, Eigen::Index m, std::uint64_t seed) {
  return project(data, gaussian_matrix(data.dim(), m, seed), m, seed);
}

void save_sketch_matrix(const ProjectionSketch& sketch, const std::filesystem::path& path) {
  const auto& r = sketch.matrix_r;
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (r.rows() > kMax || r.cols() > kMax) throw InvalidArgument("sketch too large for file format");
  std::array<char, 16> header{};
  std::memcpy(header.data(), kMagic.data(), kMagic.size());
  put_u32(header.data() + 4, static_cast<std::uint32_t>(r.rows()));
  put_u32(header.data() + 8, static_cast<std::uint32_t>(r.cols()));
  put_u32(header.data() + 12, static_cast<std::uint32_t>(sketch.seed & 0xffffffffULL));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(header.data(), header.size());
  out.write(reinterpret_cast<const char*>(r.data()),
            static_cast<std::streamsize>(r.size() * sizeof(double)));
  if (!out) throw IoError("failed writing " + path.string());
}

SketchFile load_sketch_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<char, 16> header{};
  in.read(header.data(), header.size());
  if (in.gcount() != static_cast<std::streamsize>(header.size()) ||
      std::memcmp(header.data(), kMagic.data(), kMagic.size()) != 0) {
    throw IoError(path.string() + " is not a sketch file");
  }
  const std::uint32_t d = get_u32(header.data() + 4);
  const std::uint32_t m = get_u32(header.data() + 8);
  if (d == 0 || m == 0) throw IoError(path.string() + " has an empty sketch header");
  SketchFile file;
  file.seed_low = get_u32(header.data() + 12);
  file.matrix_r.resize(d, m);
  const auto bytes = static_cast<std::streamsize>(file.matrix_r.size() * sizeof(double));
  in.read(reinterpret_cast<char*>(file.matrix_r.data()), bytes);
  if (in.gcount() != bytes) throw IoError(path.string() + " is truncated");
  return file;
}

}  // namespace drp
