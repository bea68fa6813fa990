#include "concentration.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace drp {
namespace {

void check_probability_terms(double epsilon, double epsilon_max, double delta, double c) {
  if (!(epsilon > 0.0) || epsilon > epsilon_max) {
    throw InvalidArgument("epsilon must lie in (0, " + std::to_string(epsilon_max) + "]");
  }
  if (!(delta > 0.0) || !(delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (!(c > 0.0)) throw InvalidArgument("c must be positive");
}

Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& spd) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spd);
  if (eig.info() != Eigen::Success) throw DecompositionError("eigendecomposition failed");
  const Eigen::VectorXd inv = eig.eigenvalues().cwiseSqrt().cwiseInverse();
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

long stable_ceil(long double value) {
  const long double nearest = std::round(value);
  if (std::abs(value - nearest) <= 1e-9L * std::max(1.0L, std::abs(value))) {
    return static_cast<long>(nearest);
  }
  return static_cast<long>(std::ceil(value));
}

long sample_size_bound(long r, double epsilon, double delta, double c) {
  if (r < 1) throw InvalidArgument("rank must be at least 1");
  check_probability_terms(epsilon, 0.5, delta, c);
  const long double eps = epsilon;
  const long double value =
      (static_cast<long double>(r) + 1.0L) * std::log(2.0L * r / delta) / (c * eps * eps);
  return stable_ceil(value);
}

long full_rank_sample_bound(std::span<const double> singular_values, double lambda, double gamma,
                            double epsilon, double delta, long d, double c) {
  check_probability_terms(epsilon, 1.0, delta, c);
  if (d < 1) throw InvalidArgument("d must be at least 1");
  const double rbar = effective_rank(singular_values, lambda, gamma);
  if (rbar == 0.0) return 0;
  const long double top = singular_values.empty() ? 0.0 : singular_values.front();
  const long double ratio = static_cast<long double>(lambda) / gamma;
  const long double eps = epsilon;
  const long double value = rbar * top * top / (c * eps * eps * (ratio + top * top)) *
                            std::log(2.0L * d / delta);
  return stable_ceil(value);
}

double spectral_deviation(const Eigen::MatrixXd& a) {
  const Eigen::Index r = a.rows();
  const double m = static_cast<double>(a.cols());
  Eigen::MatrixXd dev = Eigen::MatrixXd::Zero(r, r);
  dev.selfadjointView<Eigen::Lower>().rankUpdate(a, 1.0 / m);
  dev.diagonal().array() -= 1.0;
  dev = dev.selfadjointView<Eigen::Lower>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dev, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw DecompositionError("eigendecomposition failed");
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_deviation(long r, long m, std::uint64_t seed) {
  if (r < 1 || m < 1) throw InvalidArgument("r and m must be at least 1");
  NormalSampler rng(seed, Stream::kDeviation);
  return spectral_deviation(rng.matrix(r, m));
}

std::pair<double, double> ridge_identity_deviation(const Eigen::MatrixXd& features,
                                                   double lambda_over_gamma,
                                                   const Eigen::MatrixXd& r_matrix) {
  if (!(lambda_over_gamma > 0.0)) throw InvalidArgument("lambda/gamma must be positive");
  if (r_matrix.rows() != features.rows()) throw DimensionMismatch("R must have d rows");
  const Eigen::Index n = features.cols();
  const double m = static_cast<double>(r_matrix.cols());

  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(n, n) * lambda_over_gamma;
  k.selfadjointView<Eigen::Lower>().rankUpdate(features.transpose());
  k = k.selfadjointView<Eigen::Lower>();

  const Eigen::MatrixXd projected = r_matrix.transpose() * features;  // m x n
  Eigen::MatrixXd kt = Eigen::MatrixXd::Identity(n, n) * lambda_over_gamma;
  kt.selfadjointView<Eigen::Lower>().rankUpdate(projected.transpose(), 1.0 / m);
  kt = kt.selfadjointView<Eigen::Lower>();

  const Eigen::MatrixXd w = inverse_sqrt(k);
  Eigen::MatrixXd whitened = w * kt * w;
  whitened = 0.5 * (whitened + whitened.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(whitened, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw DecompositionError("eigendecomposition failed");
  return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

std::pair<double, double> ridge_identity_deviation(const Eigen::MatrixXd& features,
                                                   double lambda_over_gamma, long m,
                                                   std::uint64_t seed) {
  if (m < 1) throw InvalidArgument("m must be at least 1");
  NormalSampler rng(seed, Stream::kSketch);
  return ridge_identity_deviation(features, lambda_over_gamma, rng.matrix(features.rows(), m));
}

ConcentrationReport concentration_trials(long r, long m, double epsilon, double delta, int trials,
                                         std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("trials must be at least 1");
  if (!(delta > 0.0) || !(delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  ConcentrationReport report;
  report.threshold = epsilon;
  report.trials = trials;
  report.delta = delta;
  for (int t = 0; t < trials; ++t) {
    const double dev = spectral_deviation(r, m, seed + static_cast<std::uint64_t>(t));
    report.deviations.push_back(dev);
    report.deviation = std::max(report.deviation, dev);
    if (dev > epsilon) ++report.failures;
  }
  const double slack = 3.0 * std::sqrt(delta * (1.0 - delta) / trials);
  report.passed = static_cast<double>(report.failures) / trials <= delta + slack;
  return report;
}

long empirical_sample_size(long r, double epsilon, int trials, std::uint64_t seed,
                           double success_fraction) {
  if (r < 1 || trials < 1) throw InvalidArgument("r and trials must be at least 1");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  auto holds = [&](long m) {
    int ok = 0;
    for (int t = 0; t < trials; ++t) {
      if (spectral_deviation(r, m, seed + static_cast<std::uint64_t>(t)) <= epsilon) ++ok;
    }
    return ok >= success_fraction * trials;
  };
  long hi = std::max<long>(1, r);
  while (!holds(hi)) hi *= 2;
  long lo = hi / 2;  // lo fails or is 0
  if (lo >= 1 && holds(lo)) return lo;
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (holds(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace drp
