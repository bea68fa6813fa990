#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "loss.hpp"
#include "model.hpp"
#include "sketch.hpp"
#include "solve.hpp"

namespace drp {

enum class RecoveryMethod { kNaive, kDrp, kDrpIterative, kRidgeClosed };

std::string method_name(RecoveryMethod method);
RecoveryMethod parse_method(std::string_view text);

struct RecoveryResult {
  Eigen::VectorXd recovered;
  std::optional<Eigen::VectorXd> reference;
  std::optional<double> rel_error;
  RecoveryMethod method = RecoveryMethod::kDrp;

  // Solution of the sketched problem and the dual read off from it, when the
  // method computes them.
  Eigen::VectorXd sketched_solution;
  Eigen::VectorXd duals;
  long solver_iterations = 0;

  void set_reference(const Eigen::VectorXd& w_star);
};

struct IterationTrace {
  // Relative error of the iterate after t = 0..T steps; entry 0 is 1.
  std::vector<double> per_iteration_errors;
  Eigen::VectorXd duals;
  int iterations_run = 0;
  bool stopped_early = false;
};

// |a - b| / |b|
double relative_error(const Eigen::VectorXd& recovered, const Eigen::VectorXd& reference);

// R z / sqrt(m)
Eigen::VectorXd recover_naive(const Eigen::MatrixXd& r_matrix, const Eigen::VectorXd& z_star,
                              Eigen::Index m);

// Solves the sketched problem, reads the dual off its solution and maps it back
// through the original data. No d-dimensional problem is solved.
RecoveryResult recover_drp(const Dataset& data, const LossSpec& loss, double lambda,
                           const ProjectionSketch& sketch, const SolverConfig& config = {});

// X (lambda I + X^T R R^T X / m)^{-1} y through an n x n solve.
Eigen::VectorXd ridge_drp_closed_form(const Dataset& data, double lambda,
                                      const ProjectionSketch& sketch);

// Iterative dual random projection. Each step solves
//   min_z lambda/2 |z + R^T w / sqrt(m)|^2 + sum_i loss(y_i z^T xhat_i + y_i w^T x_i)
// around the current iterate w, with the sketch computed once up front.
class IterativeRecovery {
 public:
  IterativeRecovery(const Dataset& data, const LossSpec& loss, double lambda,
                    const ProjectionSketch& sketch, SolverConfig config = {});

  struct Step {
    Eigen::VectorXd z;
    Eigen::VectorXd increment_duals;  // duals of the shifted losses
    Eigen::VectorXd duals;            // cumulative duals after the step
  };

  Step step();

  const Eigen::VectorXd& current() const { return current_; }
  const Eigen::VectorXd& duals() const { return duals_; }
  int steps_taken() const { return steps_; }

  // y_i w^T x_i for the current iterate, computed in the original space.
  const Eigen::VectorXd& margin_offsets() const { return offsets_; }
  // R^T w / sqrt(m) for the current iterate.
  const Eigen::VectorXd& regularizer_shift() const { return shift_; }

  // Objective of the next step's sketched problem, as stated above.
  double step_objective(const Eigen::VectorXd& z) const;
  // lambda/2 |z|^2 + sum_i l_i(y_i z^T xhat_i) with the shifted losses
  //   l_i(u) = loss(u + y_i w^T x_i) - alpha_i u.
  double shifted_loss_objective(const Eigen::VectorXd& z) const;

 private:
  void refresh_offsets();

  const Dataset& data_;
  LossSpec loss_;
  double lambda_;
  const ProjectionSketch& sketch_;
  SolverConfig config_;
  Eigen::VectorXd current_;
  Eigen::VectorXd duals_;
  Eigen::VectorXd offsets_;
  Eigen::VectorXd shift_;
  int steps_ = 0;
};

// Runs up to t_iters steps. Stops early once the sketched increment is below
// 1e-12 of the iterate. Solver failures are rethrown with the step index.
std::pair<RecoveryResult, IterationTrace> recover_iterative(
    const Dataset& data, const LossSpec& loss, double lambda, const ProjectionSketch& sketch,
    int t_iters, const SolverConfig& config = {},
    const std::optional<Eigen::VectorXd>& reference = std::nullopt);

// |U_r^T (a - b)|: the largest x^T (a - b) over unit x in the span of the data.
double span_restricted_error(const SpectrumInfo& spectrum, const Eigen::VectorXd& w_a,
                             const Eigen::VectorXd& w_b);

// |sqrt(m) z - R^T w| / |R^T w|
double measurement_error(const Eigen::VectorXd& z_star, const Eigen::MatrixXd& r_matrix,
                         Eigen::Index m, const Eigen::VectorXd& w_star);

}  // namespace drp
