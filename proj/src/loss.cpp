#include "loss.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "error.hpp"

namespace drp {
namespace {

double xlogx(double x) { return x <= 0.0 ? 0.0 : x * std::log(x); }

}  // namespace

LossSpec LossSpec::smoothed_hinge(double smoothing) {
  if (!(smoothing > 0.0) || !std::isfinite(smoothing)) {
    throw InvalidArgument("smoothed_hinge smoothing must be positive and finite");
  }
  return LossSpec(LossKind::kSmoothedHinge, smoothing);
}

LossSpec LossSpec::parse(std::string_view text) {
  if (text == "square") return square();
  if (text == "logistic") return logistic();
  constexpr std::string_view kHinge = "smoothed_hinge";
  if (text.substr(0, kHinge.size()) == kHinge) {
    auto rest = text.substr(kHinge.size());
    if (rest.empty()) return smoothed_hinge();
    if (rest.front() == ':' && rest.size() > 1) {
      rest.remove_prefix(1);
      double mu = 0.0;
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), mu);
      if (ec == std::errc() && ptr == rest.data() + rest.size()) return smoothed_hinge(mu);
    }
  }
  throw InvalidArgument("unknown loss '" + std::string(text) +
                        "' (expected square | logistic | smoothed_hinge:<mu>)");
}

double LossSpec::gamma() const {
  switch (kind_) {
    case LossKind::kSquare: return 1.0;
    case LossKind::kLogistic: return 0.25;
    case LossKind::kSmoothedHinge: return 1.0 / smoothing_;
  }
  return 1.0;
}

Interval LossSpec::dual_domain() const {
  if (kind_ == LossKind::kSquare) {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
  return {-1.0, 0.0};
}

std::string LossSpec::name() const {
  switch (kind_) {
    case LossKind::kSquare: return "square";
    case LossKind::kLogistic: return "logistic";
    case LossKind::kSmoothedHinge: {
      std::ostringstream os;
      os.precision(17);
      os << "smoothed_hinge:" << smoothing_;
      return os.str();
    }
  }
  return {};
}

double LossSpec::value(double z) const {
  switch (kind_) {
    case LossKind::kSquare: return 0.5 * (1.0 - z) * (1.0 - z);
    case LossKind::kLogistic:
      // ln(1 + e^{-z}) without overflow for large |z|.
      return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
    case LossKind::kSmoothedHinge: {
      const double mu = smoothing_;
      if (z >= 1.0) return 0.0;
      if (z <= 1.0 - mu) return 1.0 - z - 0.5 * mu;
      return (1.0 - z) * (1.0 - z) / (2.0 * mu);
    }
  }
  return 0.0;
}

double LossSpec::grad(double z) const {
  switch (kind_) {
    case LossKind::kSquare: return z - 1.0;
    case LossKind::kLogistic: {
      if (z >= 0.0) {
        const double e = std::exp(-z);
        return -e / (1.0 + e);
      }
      return -1.0 / (1.0 + std::exp(z));
    }
    case LossKind::kSmoothedHinge: {
      if (z >= 1.0) return 0.0;
      if (z <= 1.0 - smoothing_) return -1.0;
      return (z - 1.0) / smoothing_;
    }
  }
  return 0.0;
}

double LossSpec::curvature(double z) const {
  switch (kind_) {
    case LossKind::kSquare: return 1.0;
    case LossKind::kLogistic: {
      const double e = std::exp(-std::abs(z));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case LossKind::kSmoothedHinge:
      return (z < 1.0 && z > 1.0 - smoothing_) ? 1.0 / smoothing_ : 0.0;
  }
  return 0.0;
}

bool LossSpec::in_domain(double alpha) const {
  if (!std::isfinite(alpha)) return false;
  const Interval omega = dual_domain();
  return alpha >= omega.lo - kDomainTolerance && alpha <= omega.hi + kDomainTolerance;
}

double LossSpec::conjugate(double alpha) const {
  if (!in_domain(alpha)) {
    std::ostringstream os;
    os.precision(17);
    os << "dual variable " << alpha << " outside the domain of " << name();
    throw DomainError(os.str());
  }
  switch (kind_) {
    case LossKind::kSquare: return alpha + 0.5 * alpha * alpha;
    case LossKind::kLogistic: {
      const double a = std::clamp(alpha, -1.0, 0.0);
      return xlogx(-a) + xlogx(1.0 + a);
    }
    case LossKind::kSmoothedHinge: {
      const double a = std::clamp(alpha, -1.0, 0.0);
      return a + 0.5 * smoothing_ * a * a;
    }
  }
  return 0.0;
}

}  // namespace drp
