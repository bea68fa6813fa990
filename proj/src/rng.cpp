#include "rng.hpp"

#include <cmath>

namespace drp {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

NormalSampler::NormalSampler(std::uint64_t seed, Stream stream)
    : engine_(splitmix64(seed ^ static_cast<std::uint64_t>(stream))) {}

double NormalSampler::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NormalSampler::sign() { return (engine_() >> 63) ? 1.0 : -1.0; }

double NormalSampler::operator()() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

Eigen::MatrixXd NormalSampler::matrix(Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd out(rows, cols);
  double* data = out.data();
  const Eigen::Index total = rows * cols;
  for (Eigen::Index k = 0; k < total; ++k) data[k] = (*this)();
  return out;
}

}  // namespace drp
