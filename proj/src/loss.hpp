#pragma once

#include <string>
#include <string_view>

namespace drp {

enum class LossKind { kSquare, kLogistic, kSmoothedHinge };

// Closed interval holding the dual variable of a loss.
struct Interval {
  double lo;
  double hi;
};

// Smooth convex loss l(z) with gradient, curvature, Fenchel conjugate l*(a),
// smoothness constant gamma and dual domain Omega.
class LossSpec {
 public:
  static constexpr double kDomainTolerance = 1e-12;

  static LossSpec square() { return LossSpec(LossKind::kSquare, 1.0); }
  static LossSpec logistic() { return LossSpec(LossKind::kLogistic, 1.0); }
  static LossSpec smoothed_hinge(double smoothing = 1.0);

  // "square", "logistic", "smoothed_hinge" or "smoothed_hinge:<mu>".
  static LossSpec parse(std::string_view text);

  LossKind kind() const { return kind_; }
  double smoothing() const { return smoothing_; }
  double gamma() const;
  Interval dual_domain() const;
  std::string name() const;

  double value(double z) const;
  double grad(double z) const;
  // Second derivative (a generalized one at the hinge kinks).
  double curvature(double z) const;

  bool in_domain(double alpha) const;
  // Throws DomainError when alpha lies outside Omega (beyond kDomainTolerance).
  double conjugate(double alpha) const;

 private:
  LossSpec(LossKind kind, double smoothing) : kind_(kind), smoothing_(smoothing) {}

  LossKind kind_;
  double smoothing_;
};

}  // namespace drp
