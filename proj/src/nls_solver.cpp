#include "mheslam/nls_solver.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mheslam/errors.hpp"

namespace mheslam {

void NlsProblem::set_bounds(Eigen::VectorXd lower, Eigen::VectorXd upper)
{
    if (lower.size() != dimension_ || upper.size() != dimension_) {
        throw InvalidParam("bound dimension does not match problem dimension");
    }
    if ((lower.array() > upper.array()).any()) {
        throw InvalidParam("lower bound exceeds upper bound");
    }
    bounds_ = Box{std::move(lower), std::move(upper)};
}

namespace {

Eigen::VectorXd clamp_to_bounds(const Eigen::VectorXd& x, const std::optional<Box>& bounds)
{
    if (!bounds) {
        return x;
    }
    return x.cwiseMax(bounds->lower).cwiseMin(bounds->upper);
}

// Cost only; infinity when a residual is non-finite or a block throws.
double evaluate_cost(const NlsProblem& problem, const Eigen::VectorXd& x)
{
    double cost = 0.0;
    Eigen::VectorXd r;
    for (const auto& block : problem.blocks()) {
        try {
            block.eval(x, r, nullptr);
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
        if (!r.allFinite()) {
            return std::numeric_limits<double>::infinity();
        }
        cost += block.discount * r.dot(block.weight * r);
    }
    return cost;
}

struct Linearization {
    double cost = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;  // Gauss-Newton approximation
};

Linearization linearize(const NlsProblem& problem, const Eigen::VectorXd& x)
{
    const int n = problem.dimension();
    Linearization lin;
    lin.gradient = Eigen::VectorXd::Zero(n);
    lin.hessian = Eigen::MatrixXd::Zero(n, n);

    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    for (const auto& block : problem.blocks()) {
        block.eval(x, r, &jac);
        if (!r.allFinite() || !jac.allFinite()) {
            throw NumericalFailure("non-finite residual or Jacobian");
        }
        const Eigen::MatrixXd wj = block.weight * jac;
        lin.cost += block.discount * r.dot(block.weight * r);
        lin.gradient.noalias() += 2.0 * block.discount * (wj.transpose() * r);
        lin.hessian.noalias() += 2.0 * block.discount * (jac.transpose() * wj);
    }
    return lin;
}

}  // namespace

SolveReport solve(const NlsProblem& problem, const Eigen::VectorXd& x0, const SolveOptions& opts)
{
    if (x0.size() != problem.dimension()) {
        throw InvalidParam("start point dimension does not match problem dimension");
    }

    Eigen::VectorXd x = clamp_to_bounds(x0, problem.bounds());
    if (!x.allFinite()) {
        throw NumericalFailure("non-finite start point");
    }

    Linearization lin = linearize(problem, x);
    double mu = opts.initial_damping;

    SolveReport report;
    report.solution = x;
    report.cost = lin.cost;
    report.gradient_norm = lin.gradient.lpNorm<Eigen::Infinity>();

    const Eigen::MatrixXd identity =
        Eigen::MatrixXd::Identity(problem.dimension(), problem.dimension());

    while (report.iterations < opts.max_iterations) {
        if (report.gradient_norm < opts.gradient_tol) {
            report.converged = true;
            return report;
        }
        ++report.iterations;

        const Eigen::MatrixXd damped = lin.hessian + mu * identity;
        const Eigen::VectorXd step = Eigen::LDLT<Eigen::MatrixXd>(damped).solve(-lin.gradient);

        bool accepted = false;
        if (step.allFinite()) {
            const Eigen::VectorXd trial = clamp_to_bounds(x + step, problem.bounds());
            const double trial_cost = evaluate_cost(problem, trial);
            if (trial_cost < lin.cost) {
                const double step_norm = (trial - x).norm();
                x = trial;
                lin = linearize(problem, x);
                mu *= opts.damping_decrease;
                accepted = true;

                report.solution = x;
                report.cost = lin.cost;
                report.gradient_norm = lin.gradient.lpNorm<Eigen::Infinity>();
                if (step_norm < opts.step_tol) {
                    report.converged = true;
                    return report;
                }
            }
        }

        if (!accepted) {
            mu = mu > 0.0 ? mu * opts.damping_increase : std::max(opts.initial_damping, 1e-4);
            if (mu > opts.max_damping) {
                // No descent direction at meaningful step sizes; report the
                // best iterate found so far.
                report.converged = report.gradient_norm < opts.gradient_tol;
                return report;
            }
        }
    }

    report.converged = report.gradient_norm < opts.gradient_tol;
    return report;
}

HorizonCheck check_horizon_condition(double eta, const Eigen::MatrixXd& U_upper,
                                     const Eigen::MatrixXd& U_lower, int M)
{
    if (eta < 0.0 || eta >= 1.0) {
        throw InvalidParam("discount factor must lie in [0, 1)");
    }
    if (M < 1) {
        throw InvalidParam("horizon must be at least 1");
    }
    if (U_upper.rows() != U_upper.cols() || U_lower.rows() != U_lower.cols() ||
        U_upper.rows() != U_lower.rows()) {
        throw InvalidParam("weight matrices must be square and of equal size");
    }

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(U_upper, U_lower,
                                                                  Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) {
        throw NumericalFailure("generalized eigenvalue computation failed");
    }
    const double lambda_max = eig.eigenvalues().maxCoeff();

    HorizonCheck check;
    check.lhs = 4.0 * std::pow(eta, M) * lambda_max;
    check.holds = check.lhs < 1.0;
    return check;
}

}  // namespace mheslam
