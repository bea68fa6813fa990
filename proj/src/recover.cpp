#include "recover.hpp"

#include <cmath>

#include "error.hpp"

namespace drp {
namespace {

constexpr double kEarlyStop = 1e-12;

void check_sketch(const Dataset& data, const ProjectionSketch& sketch) {
  if (sketch.sketched_features.cols() != data.size() ||
      sketch.sketched_features.rows() != sketch.m || sketch.matrix_r.rows() != data.dim() ||
      sketch.matrix_r.cols() != sketch.m) {
    throw DimensionMismatch("sketch was not built from this dataset");
  }
}

Eigen::VectorXd map_duals(const Dataset& data, double lambda, const Eigen::VectorXd& duals) {
  return -(data.features() * data.labels().cwiseProduct(duals)) / lambda;
}

}  // namespace

std::string method_name(RecoveryMethod method) {
  switch (method) {
    case RecoveryMethod::kNaive: return "naive";
    case RecoveryMethod::kDrp: return "drp";
    case RecoveryMethod::kDrpIterative: return "drp_iterative";
    case RecoveryMethod::kRidgeClosed: return "ridge_closed";
  }
  return {};
}

RecoveryMethod parse_method(std::string_view text) {
  if (text == "naive") return RecoveryMethod::kNaive;
  if (text == "drp") return RecoveryMethod::kDrp;
  if (text == "drp_iterative" || text == "drp-iterative") return RecoveryMethod::kDrpIterative;
  if (text == "ridge_closed" || text == "ridge-closed") return RecoveryMethod::kRidgeClosed;
  throw InvalidArgument("unknown recovery method '" + std::string(text) +
                        "' (expected naive | drp | ridge-closed)");
}

double relative_error(const Eigen::VectorXd& recovered, const Eigen::VectorXd& reference) {
  if (recovered.size() != reference.size()) throw DimensionMismatch("vectors differ in length");
  const double denom = reference.norm();
  if (denom == 0.0) throw DomainError("relative error against a zero reference");
  return (recovered - reference).norm() / denom;
}

void RecoveryResult::set_reference(const Eigen::VectorXd& w_star) {
  rel_error = relative_error(recovered, w_star);
  reference = w_star;
}

Eigen::VectorXd recover_naive(const Eigen::MatrixXd& r_matrix, const Eigen::VectorXd& z_star,
                              Eigen::Index m) {
  if (m < 1 || r_matrix.cols() != m || z_star.size() != m) {
    throw DimensionMismatch("naive recovery needs a d x m matrix and a length-m solution");
  }
  return r_matrix * z_star / std::sqrt(static_cast<double>(m));
}

RecoveryResult recover_drp(const Dataset& data, const LossSpec& loss, double lambda,
                           const ProjectionSketch& sketch, const SolverConfig& config) {
  check_sketch(data, sketch);
  const PrimalSolution z = solve_primal(sketch.sketched_features, data.labels(), loss, lambda, config);
  DualSolution dual = dual_from_primal(sketch.sketched_features, data.labels(), loss, z.weights);

  RecoveryResult result;
  result.method = RecoveryMethod::kDrp;
  result.recovered = map_duals(data, lambda, dual.alphas);
  result.sketched_solution = z.weights;
  result.solver_iterations = z.iterations;
  result.duals = std::move(dual.alphas);
  return result;
}

Eigen::VectorXd ridge_drp_closed_form(const Dataset& data, double lambda,
                                      const ProjectionSketch& sketch) {
  check_sketch(data, sketch);
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  const Eigen::Index n = data.size();
  // X^T R R^T X / m is the Gram matrix of the sketched features.
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) * lambda;
  system.selfadjointView<Eigen::Lower>().rankUpdate(sketch.sketched_features.transpose());
  system = system.selfadjointView<Eigen::Lower>();
  return data.features() * solve_spd(system, data.labels());
}

IterativeRecovery::IterativeRecovery(const Dataset& data, const LossSpec& loss, double lambda,
                                     const ProjectionSketch& sketch, SolverConfig config)
    : data_(data), loss_(loss), lambda_(lambda), sketch_(sketch), config_(config) {
  check_sketch(data, sketch);
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  current_ = Eigen::VectorXd::Zero(data.dim());
  duals_ = Eigen::VectorXd::Zero(data.size());
  refresh_offsets();
}

void IterativeRecovery::refresh_offsets() {
  offsets_ = (data_.features().transpose() * current_).cwiseProduct(data_.labels());
  shift_ = sketch_.matrix_r.transpose() * current_ / std::sqrt(static_cast<double>(sketch_.m));
}

IterativeRecovery::Step IterativeRecovery::step() {
  const PrimalSolution sol = minimize_regularized(sketch_.sketched_features, data_.labels(), loss_,
                                                  lambda_, config_, {shift_, offsets_});
  Step out;
  out.z = sol.weights;
  const Eigen::VectorXd u =
      (sketch_.sketched_features.transpose() * out.z).cwiseProduct(data_.labels()) + offsets_;
  out.duals.resize(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out.duals[i] = loss_.grad(u[i]);
  out.increment_duals = out.duals - duals_;

  duals_ = out.duals;
  current_ = map_duals(data_, lambda_, duals_);
  refresh_offsets();
  ++steps_;
  return out;
}

double IterativeRecovery::step_objective(const Eigen::VectorXd& z) const {
  return primal_objective(sketch_.sketched_features, data_.labels(), loss_, lambda_, z,
                          {shift_, offsets_});
}

double IterativeRecovery::shifted_loss_objective(const Eigen::VectorXd& z) const {
  const Eigen::VectorXd u = (sketch_.sketched_features.transpose() * z).cwiseProduct(data_.labels());
  double total = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    total += loss_.value(u[i] + offsets_[i]) - duals_[i] * u[i];
  }
  return 0.5 * lambda_ * z.squaredNorm() + total;
}

std::pair<RecoveryResult, IterationTrace> recover_iterative(
    const Dataset& data, const LossSpec& loss, double lambda, const ProjectionSketch& sketch,
    int t_iters, const SolverConfig& config, const std::optional<Eigen::VectorXd>& reference) {
  if (t_iters < 1) throw InvalidArgument("iteration count must be at least 1");
  IterativeRecovery state(data, loss, lambda, sketch, config);
  IterationTrace trace;
  if (reference) trace.per_iteration_errors.push_back(relative_error(state.current(), *reference));

  for (int t = 1; t <= t_iters; ++t) {
    IterativeRecovery::Step s;
    try {
      s = state.step();
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("iteration " + std::to_string(t) + ": " + e.what(), e.best());
    }
    if (reference) trace.per_iteration_errors.push_back(relative_error(state.current(), *reference));
    trace.iterations_run = t;
    if (s.z.norm() <= kEarlyStop * state.current().norm()) {
      trace.stopped_early = t < t_iters;
      break;
    }
  }

  RecoveryResult result;
  result.method = RecoveryMethod::kDrpIterative;
  result.recovered = state.current();
  result.duals = state.duals();
  if (reference) result.set_reference(*reference);
  trace.duals = state.duals();
  return {std::move(result), std::move(trace)};
}

double span_restricted_error(const SpectrumInfo& spectrum, const Eigen::VectorXd& w_a,
                             const Eigen::VectorXd& w_b) {
  if (w_a.size() != w_b.size() || w_a.size() != spectrum.left_vectors.rows()) {
    throw DimensionMismatch("vectors must match the data dimension");
  }
  return (spectrum.range_basis().transpose() * (w_a - w_b)).norm();
}

double measurement_error(const Eigen::VectorXd& z_star, const Eigen::MatrixXd& r_matrix,
                         Eigen::Index m, const Eigen::VectorXd& w_star) {
  if (r_matrix.cols() != m || z_star.size() != m || r_matrix.rows() != w_star.size()) {
    throw DimensionMismatch("measurement error inputs disagree in size");
  }
  const Eigen::VectorXd measured = r_matrix.transpose() * w_star;
  const double denom = measured.norm();
  if (denom == 0.0) throw DomainError("R^T w* is zero");
  return (std::sqrt(static_cast<double>(m)) * z_star - measured).norm() / denom;
}

}  // namespace drp
