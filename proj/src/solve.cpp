#include "solve.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace drp {
namespace {

constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-12;
// Newton iterations without a new best gradient norm before giving up.
constexpr int kStallLimit = 12;

void check_shapes(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                  const ObjectiveShift& terms) {
  if (labels.size() != features.cols()) {
    throw DimensionMismatch("features have " + std::to_string(features.cols()) +
                            " examples but there are " + std::to_string(labels.size()) + " labels");
  }
  if (terms.shift.size() != 0 && terms.shift.size() != features.rows()) {
    throw DimensionMismatch("regularizer shift has the wrong length");
  }
  if (terms.offsets.size() != 0 && terms.offsets.size() != features.cols()) {
    throw DimensionMismatch("margin offsets have the wrong length");
  }
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be positive");
}

// The objective in the coordinates the Newton method works in:
//   lambda/2 |c + shift|^2 + sum_i loss(y_i b_i^T c + offset_i)
// where b_i are the columns of `features_`.
class ReducedObjective {
 public:
  ReducedObjective(Eigen::MatrixXd features, const Eigen::VectorXd& labels, const LossSpec& loss,
                   double lambda, Eigen::VectorXd shift, Eigen::VectorXd offsets)
      : features_(std::move(features)),
        labels_(labels),
        loss_(loss),
        lambda_(lambda),
        shift_(std::move(shift)),
        offsets_(std::move(offsets)) {}

  Eigen::Index dim() const { return features_.rows(); }

  Eigen::VectorXd margins(const Eigen::VectorXd& c) const {
    Eigen::VectorXd u = (features_.transpose() * c).cwiseProduct(labels_);
    if (offsets_.size() != 0) u += offsets_;
    return u;
  }

  double value(const Eigen::VectorXd& c) const {
    const Eigen::VectorXd u = margins(c);
    double total = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) total += loss_.value(u[i]);
    return 0.5 * lambda_ * shifted(c).squaredNorm() + total;
  }

  struct Derivatives {
    double value;
    Eigen::VectorXd gradient;
    Eigen::VectorXd curvature;  // per example
    double roundoff_scale;      // magnitude of the summed gradient terms
  };

  Derivatives derivatives(const Eigen::VectorXd& c) const {
    const Eigen::VectorXd u = margins(c);
    const Eigen::Index n = u.size();
    Eigen::VectorXd signed_grad(n);
    Eigen::VectorXd curv(n);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      total += loss_.value(u[i]);
      signed_grad[i] = labels_[i] * loss_.grad(u[i]);
      curv[i] = loss_.curvature(u[i]);
    }
    const Eigen::VectorXd s = shifted(c);
    Derivatives out;
    out.value = 0.5 * lambda_ * s.squaredNorm() + total;
    out.gradient = lambda_ * s + features_ * signed_grad;
    out.curvature = std::move(curv);
    out.roundoff_scale =
        lambda_ * s.norm() + (features_.cwiseAbs() * signed_grad.cwiseAbs()).norm();
    return out;
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& curvature) const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(dim(), dim()) * lambda_;
    const Eigen::MatrixXd weighted = features_ * curvature.cwiseSqrt().asDiagonal();
    h.selfadjointView<Eigen::Lower>().rankUpdate(weighted);
    return h.selfadjointView<Eigen::Lower>();
  }

 private:
  Eigen::VectorXd shifted(const Eigen::VectorXd& c) const {
    return shift_.size() == 0 ? c : Eigen::VectorXd(c + shift_);
  }

  Eigen::MatrixXd features_;
  const Eigen::VectorXd& labels_;
  const LossSpec& loss_;
  double lambda_;
  Eigen::VectorXd shift_;
  Eigen::VectorXd offsets_;
};

struct NewtonResult {
  Eigen::VectorXd point;
  double value = 0.0;
  double grad_norm = 0.0;
  long iterations = 0;
  std::vector<double> trace;
  bool converged = false;
  std::string reason;
};

NewtonResult newton(const ReducedObjective& obj, const SolverConfig& config) {
  const double eps = std::numeric_limits<double>::epsilon();
  NewtonResult res;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(obj.dim());
  auto deriv = obj.derivatives(c);
  res.trace.push_back(deriv.value);

  Eigen::VectorXd best = c;
  double best_norm = std::numeric_limits<double>::infinity();
  double best_scale = 0.0;
  int stall = 0;
  // Gradient norm the evaluation itself cannot resolve below.
  auto at_floor = [&] {
    const double floor = 8.0 * eps * std::sqrt(double(obj.dim()) + 1.0) * best_scale;
    return best_norm <= std::max(config.tolerance, floor);
  };

  for (long it = 0;; ++it) {
    const double gnorm = deriv.gradient.norm();
    if (gnorm < best_norm) {
      best = c;
      best_norm = gnorm;
      best_scale = deriv.roundoff_scale;
      stall = 0;
    } else {
      ++stall;
    }
    res.iterations = it;
    if (gnorm <= config.tolerance) {
      res.converged = true;
      break;
    }
    if (it >= config.max_iterations) {
      res.reason = "iteration limit reached";
      break;
    }
    if (stall >= kStallLimit) {
      res.converged = at_floor();
      res.reason = "stalled";
      break;
    }

    Eigen::LLT<Eigen::MatrixXd> llt(obj.hessian(deriv.curvature));
    if (llt.info() != Eigen::Success) {
      res.reason = "Newton system is not positive definite";
      break;
    }
    const Eigen::VectorXd step = -llt.solve(deriv.gradient);
    const double slope = deriv.gradient.dot(step);

    bool accepted = false;
    for (double t = 1.0; t >= kMinStep; t *= 0.5) {
      const Eigen::VectorXd trial = c + t * step;
      if (obj.value(trial) <= deriv.value + kArmijo * t * slope) {
        c = trial;
        accepted = true;
        break;
      }
      // Predicted decrease below the resolution of the objective: take the
      // full Newton step on the strength of the gradient alone.
      if (t == 1.0 && -slope <= 16.0 * eps * (std::abs(deriv.value) + 1.0)) {
        if (obj.derivatives(trial).gradient.norm() < gnorm) {
          c = trial;
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      res.converged = at_floor();
      res.reason = "line search failed";
      break;
    }
    deriv = obj.derivatives(c);
    res.trace.push_back(deriv.value);
  }

  if (deriv.gradient.norm() > best_norm) {
    c = best;
    deriv = obj.derivatives(c);
  }
  res.point = std::move(c);
  res.value = deriv.value;
  res.grad_norm = deriv.gradient.norm();
  return res;
}

}  // namespace

double primal_objective(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                        const LossSpec& loss, double lambda, const Eigen::VectorXd& weights,
                        const ObjectiveShift& terms) {
  check_shapes(features, labels, terms);
  if (weights.size() != features.rows()) throw DimensionMismatch("weights have the wrong length");
  Eigen::VectorXd u = (features.transpose() * weights).cwiseProduct(labels);
  if (terms.offsets.size() != 0) u += terms.offsets;
  double total = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) total += loss.value(u[i]);
  const Eigen::VectorXd s = terms.shift.size() == 0 ? weights : Eigen::VectorXd(weights + terms.shift);
  return 0.5 * lambda * s.squaredNorm() + total;
}

Eigen::VectorXd primal_gradient(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                const LossSpec& loss, double lambda, const Eigen::VectorXd& weights,
                                const ObjectiveShift& terms) {
  check_shapes(features, labels, terms);
  if (weights.size() != features.rows()) throw DimensionMismatch("weights have the wrong length");
  Eigen::VectorXd u = (features.transpose() * weights).cwiseProduct(labels);
  if (terms.offsets.size() != 0) u += terms.offsets;
  Eigen::VectorXd signed_grad(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) signed_grad[i] = labels[i] * loss.grad(u[i]);
  const Eigen::VectorXd s = terms.shift.size() == 0 ? weights : Eigen::VectorXd(weights + terms.shift);
  return lambda * s + features * signed_grad;
}

PrimalSolution minimize_regularized(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                    const LossSpec& loss, double lambda, const SolverConfig& config,
                                    const ObjectiveShift& terms) {
  check_lambda(lambda);
  check_shapes(features, labels, terms);
  if (!(config.tolerance > 0.0)) throw InvalidArgument("solver tolerance must be positive");
  if (config.max_iterations < 0) throw InvalidArgument("max_iterations must be non-negative");

  const Eigen::Index k = features.rows();
  const Eigen::Index n = features.cols();
  const bool reduce = k > n;

  // With w = Q c - (I - Q Q^T) shift, where Q spans the columns of the
  // features, the objective only depends on c and equals the reduced one.
  Eigen::MatrixXd basis;
  Eigen::MatrixXd reduced_features;
  Eigen::VectorXd reduced_shift = terms.shift;
  if (reduce) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(features);
    basis = qr.householderQ() * Eigen::MatrixXd::Identity(k, n);
    reduced_features = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    if (terms.shift.size() != 0) reduced_shift = basis.transpose() * terms.shift;
  } else {
    reduced_features = features;
  }

  const ReducedObjective objective(std::move(reduced_features), labels, loss, lambda,
                                   std::move(reduced_shift), terms.offsets);
  NewtonResult res = newton(objective, config);

  PrimalSolution sol;
  if (reduce) {
    if (terms.shift.size() != 0) {
      sol.weights = basis * (res.point + basis.transpose() * terms.shift) - terms.shift;
    } else {
      sol.weights = basis * res.point;
    }
  } else {
    sol.weights = std::move(res.point);
  }
  sol.objective = res.value;
  sol.grad_norm = res.grad_norm;
  sol.iterations = res.iterations;
  sol.objective_trace = std::move(res.trace);
  if (!res.converged) {
    throw ConvergenceError("solver did not converge (" + res.reason + ") after " +
                               std::to_string(sol.iterations) + " iterations, gradient norm " +
                               std::to_string(sol.grad_norm),
                           std::move(sol));
  }
  return sol;
}

PrimalSolution solve_primal(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                            const LossSpec& loss, double lambda, const SolverConfig& config) {
  return minimize_regularized(features, labels, loss, lambda, config);
}

Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& spd, const Eigen::MatrixXd& rhs) {
  Eigen::LLT<Eigen::MatrixXd> llt(spd);
  if (llt.info() != Eigen::Success) throw LinearSystemError("Cholesky factorization failed");
  Eigen::MatrixXd x = llt.solve(rhs);
  if (!x.allFinite()) throw LinearSystemError("linear system solution is not finite");
  return x;
}

Eigen::VectorXd ridge_primal_system(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                    double lambda) {
  check_lambda(lambda);
  check_shapes(features, labels, {});
  const Eigen::Index d = features.rows();
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(d, d) * lambda;
  system.selfadjointView<Eigen::Lower>().rankUpdate(features);
  system = system.selfadjointView<Eigen::Lower>();
  return solve_spd(system, features * labels);
}

Eigen::VectorXd ridge_dual_system(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                  double lambda) {
  check_lambda(lambda);
  check_shapes(features, labels, {});
  const Eigen::Index n = features.cols();
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) * lambda;
  system.selfadjointView<Eigen::Lower>().rankUpdate(features.transpose());
  system = system.selfadjointView<Eigen::Lower>();
  return features * solve_spd(system, labels);
}

Eigen::VectorXd ridge_closed_form(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                  double lambda) {
  return features.rows() <= features.cols() ? ridge_primal_system(features, labels, lambda)
                                            : ridge_dual_system(features, labels, lambda);
}

DualSolution dual_from_primal(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                              const LossSpec& loss, const Eigen::VectorXd& weights) {
  check_shapes(features, labels, {});
  if (weights.size() != features.rows()) throw DimensionMismatch("weights have the wrong length");
  const Eigen::VectorXd u = (features.transpose() * weights).cwiseProduct(labels);
  DualSolution dual;
  dual.alphas.resize(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) dual.alphas[i] = loss.grad(u[i]);
  return dual;
}

Eigen::VectorXd primal_from_dual(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                 double lambda, const DualSolution& dual) {
  check_lambda(lambda);
  check_shapes(features, labels, {});
  if (dual.alphas.size() != features.cols()) throw DimensionMismatch("dual has the wrong length");
  return -(features * labels.cwiseProduct(dual.alphas)) / lambda;
}

double dual_objective(const Eigen::MatrixXd& gram, const LossSpec& loss, double lambda,
                      const DualSolution& dual) {
  check_lambda(lambda);
  const auto& a = dual.alphas;
  if (gram.rows() != gram.cols() || gram.rows() != a.size()) {
    throw DimensionMismatch("Gram matrix and dual vector disagree in size");
  }
  double conj = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) conj += loss.conjugate(a[i]);
  return -conj - a.dot(gram * a) / (2.0 * lambda);
}

}  // namespace drp
