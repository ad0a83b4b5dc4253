#pragma once

#include <Eigen/Dense>

#include <functional>

namespace purcell::lsq {

/// Fills the weighted residual vector sqrt(w_i) (model_i - y_i) and its
/// Jacobian with respect to the parameters.
using ResidualFn = std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals,
                                      Eigen::MatrixXd& jacobian)>;

struct Options {
    int max_iterations = 200;
    /// Converged when ||J^T r||_inf < grad_tol * (1 + rss) ...
    double grad_tol = 1e-10;
    /// ... or a full Gauss-Newton step would lower rss by less than
    /// reduction_tol * rss, i.e. below what rss itself resolves ...
    double reduction_tol = 1e-15;
    /// ... or an accepted step has ||delta|| < step_tol * (1 + ||p||).
    double step_tol = 1e-12;
};

struct Result {
    Eigen::VectorXd params;
    double rss = 0.0;
    double initial_rss = 0.0;
    /// J^T J at params.
    Eigen::MatrixXd normal_matrix;
    bool converged = false;
    int iterations = 0;
};

/// Damped Gauss-Newton with Marquardt diagonal scaling. Only steps that lower
/// the residual sum of squares are accepted, so rss <= initial_rss always.
/// Throws DegenerateJacobian when J^T J at the starting point has no
/// curvature in some parameter direction.
Result levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd start, const Options& opts = {});

/// Gauss-Newton covariance (rss / dof) (J^T J)^-1; empty when dof <= 0 or
/// J^T J is singular.
Eigen::MatrixXd covariance(const Result& result, Eigen::Index n_observations);

}  // namespace purcell::lsq
