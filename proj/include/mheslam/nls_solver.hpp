#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace mheslam {

/// One summand of a weighted, discounted least-squares cost:
/// discount * || r(x) ||^2_weight. The eval callback fills the residual and,
/// when jac is non-null, the (dim x n) Jacobian of r.
struct ResidualBlock {
    int dim = 0;
    Eigen::MatrixXd weight;  // symmetric PSD, dim x dim
    double discount = 1.0;
    std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac)> eval;
};

struct Box {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

class NlsProblem {
public:
    explicit NlsProblem(int dimension) : dimension_(dimension) {}

    void add_block(ResidualBlock block) { blocks_.push_back(std::move(block)); }
    void set_bounds(Eigen::VectorXd lower, Eigen::VectorXd upper);

    int dimension() const { return dimension_; }
    const std::vector<ResidualBlock>& blocks() const { return blocks_; }
    const std::optional<Box>& bounds() const { return bounds_; }

private:
    int dimension_;
    std::vector<ResidualBlock> blocks_;
    std::optional<Box> bounds_;
};

struct SolveOptions {
    int max_iterations = 50;
    double gradient_tol = 1e-10;  // infinity norm of the cost gradient
    double step_tol = 1e-12;      // norm of an accepted step
    double initial_damping = 1e-4;
    double damping_increase = 10.0;
    double damping_decrease = 0.1;
    double max_damping = 1e14;  // treated as a stall when exceeded
};

struct SolveReport {
    Eigen::VectorXd solution;
    double cost = 0.0;
    int iterations = 0;
    bool converged = false;
    double gradient_norm = 0.0;
};

/// Gauss-Newton with Levenberg-Marquardt damping on the block cost
/// sum_b discount_b * ||r_b(x)||^2_{W_b}. Accepted steps never increase the
/// cost. Returns the best iterate with converged=false when the iteration
/// budget runs out; throws NumericalFailure on a non-finite residual or
/// Jacobian at the start point or an accepted iterate.
SolveReport solve(const NlsProblem& problem, const Eigen::VectorXd& x0,
                  const SolveOptions& opts = {});

struct HorizonCheck {
    bool holds = false;
    double lhs = 0.0;
};

/// Evaluates 4 * eta^M * lambda_max(U_upper, U_lower) < 1, with lambda_max the
/// largest generalized eigenvalue of the pencil (U_upper, U_lower).
HorizonCheck check_horizon_condition(double eta, const Eigen::MatrixXd& U_upper,
                                     const Eigen::MatrixXd& U_lower, int M);

}  // namespace mheslam
