#pragma once

#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "loss.hpp"

namespace drp {

struct SolverConfig {
  double tolerance = 1e-10;  // on the Euclidean norm of the gradient
  long max_iterations = 100000;
};

struct PrimalSolution {
  Eigen::VectorXd weights;
  double objective = 0.0;
  double grad_norm = 0.0;
  long iterations = 0;
  // Objective at every accepted iterate, starting from the initial point.
  std::vector<double> objective_trace;
};

struct DualSolution {
  Eigen::VectorXd alphas;
};

// Thrown when the solver stops without a gradient certificate; carries the
// best iterate it found.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, PrimalSolution best)
      : Error(ErrorCode::kNoConvergence, what), best_(std::move(best)) {}
  const PrimalSolution& best() const { return best_; }

 private:
  PrimalSolution best_;
};

class LinearSystemError : public Error {
 public:
  explicit LinearSystemError(const std::string& what) : Error(ErrorCode::kDecomposition, what) {}
};

// Optional affine terms of the objective
//   lambda/2 |w + shift|^2 + sum_i loss(y_i x_i^T w + offsets_i).
// Empty vectors stand for zero.
struct ObjectiveShift {
  Eigen::VectorXd shift;
  Eigen::VectorXd offsets;
};

double primal_objective(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                        const LossSpec& loss, double lambda, const Eigen::VectorXd& weights,
                        const ObjectiveShift& terms = {});

Eigen::VectorXd primal_gradient(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                const LossSpec& loss, double lambda, const Eigen::VectorXd& weights,
                                const ObjectiveShift& terms = {});

// Minimizes the (shifted) regularized objective with a damped Newton method.
// When the weight dimension exceeds the number of examples the problem is
// solved exactly in the column space of the features.
PrimalSolution minimize_regularized(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                    const LossSpec& loss, double lambda, const SolverConfig& config,
                                    const ObjectiveShift& terms = {});

// lambda/2 |w|^2 + sum_i loss(y_i x_i^T w) over w in R^{rows(features)}.
PrimalSolution solve_primal(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                            const LossSpec& loss, double lambda, const SolverConfig& config = {});

// Ridge solution (lambda I + X X^T)^{-1} X y, through the smaller of the two
// equivalent linear systems.
Eigen::VectorXd ridge_closed_form(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                  double lambda);
// d x d system.
Eigen::VectorXd ridge_primal_system(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                    double lambda);
// n x n system: X (lambda I + X^T X)^{-1} y.
Eigen::VectorXd ridge_dual_system(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                  double lambda);

// alpha_i = grad loss(y_i x_i^T w).
DualSolution dual_from_primal(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                              const LossSpec& loss, const Eigen::VectorXd& weights);

// w = -(1/lambda) X D(y) alpha.
Eigen::VectorXd primal_from_dual(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                 double lambda, const DualSolution& dual);

// -sum_i loss*(alpha_i) - alpha^T G alpha / (2 lambda).
double dual_objective(const Eigen::MatrixXd& gram, const LossSpec& loss, double lambda,
                      const DualSolution& dual);

// Solves `spd * x = rhs` by Cholesky, throwing LinearSystemError on failure.
Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& spd, const Eigen::MatrixXd& rhs);

}  // namespace drp
