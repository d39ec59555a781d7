#pragma once

#include <Eigen/Dense>
#include <functional>

namespace hhdr {

// Damped Gauss-Newton least squares. The callback fills the residual vector
// and its Jacobian at x; steps solve the normal equations and are halved
// until the cost decreases.
struct GnOptions {
  int max_iterations = 200;
  double rel_step_tol = 1e-8;
  int max_halvings = 40;
};

struct GnResult {
  Eigen::VectorXd x;
  Eigen::MatrixXd jtj;  // normal matrix at the solution
  double cost = 0;      // sum of squared residuals
  int iterations = 0;
  bool converged = false;
};

using GnModel =
    std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd& jac)>;

GnResult gauss_newton(const GnModel& model, Eigen::VectorXd x0, const GnOptions& opt = {});

// Residual-scaled parameter standard deviations,
// sqrt(diag((J^T J)^-1) * cost / (m - n)).
Eigen::VectorXd parameter_std(const GnResult& res, int n_samples);

}  // namespace hhdr
