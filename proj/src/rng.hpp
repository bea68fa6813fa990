#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace drp {

// Identifies which random object a generator feeds, so that a single trial
// seed can drive the dataset and the sketch without sharing a stream.
enum class Stream : std::uint64_t {
  kSketch = 0x5eed0001,
  kFactorLeft = 0x5eed0002,
  kFactorRight = 0x5eed0003,
  kLabels = 0x5eed0004,
  kOrthoLeft = 0x5eed0005,
  kOrthoRight = 0x5eed0006,
  kPlant = 0x5eed0007,
  kDeviation = 0x5eed0008,
};

// Standard normal sampler, version 1:
//   engine  = std::mt19937_64 seeded with splitmix64(seed ^ stream)
//   uniform = top 53 bits of one engine draw, scaled to [0, 1)
//   normal  = Marsaglia polar method, both variates of each accepted pair used
// std::normal_distribution is avoided because its algorithm is library-defined.
class NormalSampler {
 public:
  static constexpr int kVersion = 1;

  NormalSampler(std::uint64_t seed, Stream stream);

  double operator()();
  double uniform();
  // Rademacher draw in {-1, +1}.
  double sign();

  // Fills column-major, i.e. entry (i, j) is draw number j * rows + i.
  Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace drp
