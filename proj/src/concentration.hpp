#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace drp {

inline constexpr double kLowRankConstant = 0.25;
inline constexpr double kFullRankConstant = 1.0 / 32.0;

struct BoundQuery {
  double epsilon = 0.5;
  double delta = 0.1;
  double c = kLowRankConstant;
  double rank_or_effective_rank = 1.0;
};

struct ConcentrationReport {
  std::vector<double> deviations;  // one per trial
  double deviation = 0.0;          // largest observed
  double threshold = 0.0;
  int trials = 0;
  int failures = 0;
  double delta = 0.0;
  // failures / trials within delta + 3 sqrt(delta (1 - delta) / trials)
  bool passed = false;
};

// ceil((r + 1) ln(2r / delta) / (c eps^2)), eps in (0, 1/2].
long sample_size_bound(long r, double epsilon, double delta, double c = kLowRankConstant);

// ceil(rbar sigma_1^2 / (c eps^2 (lambda/gamma + sigma_1^2)) ln(2d / delta)), eps in (0, 1].
long full_rank_sample_bound(std::span<const double> singular_values, double lambda, double gamma,
                            double epsilon, double delta, long d, double c = kFullRankConstant);

// |A A^T / m - I|_2 for an r x m standard Gaussian A drawn from `seed`.
double spectral_deviation(long r, long m, std::uint64_t seed);
// Same quantity for a given matrix.
double spectral_deviation(const Eigen::MatrixXd& a);

// Extreme eigenvalues (min, max) of K^{-1/2} Kt K^{-1/2}, where
//   K  = lambda_over_gamma I + X^T X,
//   Kt = lambda_over_gamma I + X^T R R^T X / m.
std::pair<double, double> ridge_identity_deviation(const Eigen::MatrixXd& features,
                                                   double lambda_over_gamma, long m,
                                                   std::uint64_t seed);
std::pair<double, double> ridge_identity_deviation(const Eigen::MatrixXd& features,
                                                   double lambda_over_gamma,
                                                   const Eigen::MatrixXd& r_matrix);

// Deviation of `trials` Gaussian r x m matrices (seeds seed, seed+1, ...) against epsilon.
ConcentrationReport concentration_trials(long r, long m, double epsilon, double delta, int trials,
                                         std::uint64_t seed);

// Smallest m (by bisection) at which the epsilon event held in at least
// `success_fraction` of `trials` trials; evaluated on seeds seed, seed+1, ...
long empirical_sample_size(long r, double epsilon, int trials, std::uint64_t seed,
                           double success_fraction = 0.95);

// Ceiling that ignores rounding noise of a few ulps above an integer.
long stable_ceil(long double value);

}  // namespace drp
