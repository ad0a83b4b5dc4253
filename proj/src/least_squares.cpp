#include "purcell/least_squares.hpp"

#include <cmath>
#include <limits>

#include "purcell/errors.hpp"

namespace purcell::lsq {

namespace {

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

Result levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd start, const Options& opts) {
    const Eigen::Index np = start.size();
    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    fn(start, r, jac);
    if (!finite(r) || !jac.allFinite()) throw DegenerateJacobian("model is not finite at the starting point");

    Result res;
    res.params = std::move(start);
    res.rss = r.squaredNorm();
    res.initial_rss = res.rss;

    Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::VectorXd grad = jac.transpose() * r;
    const double diag_max = jtj.diagonal().maxCoeff();
    for (Eigen::Index j = 0; j < np; ++j) {
        if (!(jtj(j, j) > 1e-14 * diag_max) || !(diag_max > 0.0)) {
            throw DegenerateJacobian("model has no sensitivity to parameter " + std::to_string(j) +
                                     " at the starting point");
        }
    }

    double lambda = 1e-3;
    Eigen::VectorXd r_trial;
    Eigen::MatrixXd jac_trial;
    while (res.iterations < opts.max_iterations) {
        if (grad.lpNorm<Eigen::Infinity>() < opts.grad_tol * (1.0 + res.rss)) {
            res.converged = true;
            break;
        }
        // Decrease an undamped Gauss-Newton step would still buy, g^T (J^T J)^-1 g.
        const Eigen::LDLT<Eigen::MatrixXd> gn(jtj);
        if (gn.info() == Eigen::Success) {
            const double predicted = grad.dot(gn.solve(grad));
            if (std::isfinite(predicted) && predicted >= 0.0 && predicted <= opts.reduction_tol * res.rss) {
                res.converged = true;
                break;
            }
        }
        ++res.iterations;

        Eigen::MatrixXd damped = jtj;
        for (Eigen::Index j = 0; j < np; ++j) damped(j, j) += lambda * jtj(j, j);
        const Eigen::VectorXd delta = damped.ldlt().solve(-grad);
        if (!finite(delta)) {
            lambda *= 10.0;
            continue;
        }

        const Eigen::VectorXd trial = res.params + delta;
        fn(trial, r_trial, jac_trial);
        const double rss_trial = finite(r_trial) ? r_trial.squaredNorm() : std::numeric_limits<double>::infinity();

        if (rss_trial < res.rss || (rss_trial == res.rss && delta.norm() == 0.0)) {
            res.params = trial;
            res.rss = rss_trial;
            jtj = jac_trial.transpose() * jac_trial;
            grad = jac_trial.transpose() * r_trial;
            lambda = std::max(lambda / 3.0, 1e-12);
            if (delta.norm() < opts.step_tol * (1.0 + res.params.norm())) {
                res.converged = true;
                break;
            }
        } else {
            lambda *= 4.0;
            if (lambda > 1e16) break;  // no descent direction left at working precision
        }
    }
    res.normal_matrix = jtj;
    return res;
}

Eigen::MatrixXd covariance(const Result& result, Eigen::Index n_observations) {
    const Eigen::Index np = result.params.size();
    const Eigen::Index dof = n_observations - np;
    if (dof <= 0) return {};
    Eigen::FullPivLU<Eigen::MatrixXd> lu(result.normal_matrix);
    if (!lu.isInvertible()) return {};
    return (result.rss / static_cast<double>(dof)) * lu.inverse();
}

}  // namespace purcell::lsq
