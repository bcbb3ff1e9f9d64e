#include "mheslam/ego_mhe.hpp"

#include <cmath>
#include <memory>

#include "mheslam/angles.hpp"
#include "mheslam/errors.hpp"
#include "mheslam/matrix_checks.hpp"
#include "mheslam/models.hpp"
#include "mheslam/shooting.hpp"

namespace mheslam {

void EgoMheConfig::validate() const
{
    if (eta < 0.0 || eta >= 1.0) {
        throw InvalidParam("eta must lie in [0, 1)");
    }
    if (N < 1) {
        throw InvalidParam("horizon must be at least 1");
    }
    if (!is_symmetric_pd(U_bar)) {
        throw InvalidParam("U_bar must be symmetric positive definite");
    }
    if (!is_symmetric_psd(Q)) {
        throw InvalidParam("Q must be symmetric positive semidefinite");
    }
    if (!is_symmetric_psd(R)) {
        throw InvalidParam("R must be symmetric positive semidefinite");
    }
    if (U_lower && !is_symmetric_pd(*U_lower)) {
        throw InvalidParam("U_lower must be symmetric positive definite");
    }
}

EgoUpdateResult ego_update(const EgoWindow& window, const EgoMheConfig& cfg,
                           const Eigen::VectorXd* warm_start)
{
    const int n_steps = static_cast<int>(window.data.size());
    if (n_steps < 1) {
        throw InvalidParam("ego window must not be empty");
    }

    std::vector<ControlInput> controls;
    controls.reserve(n_steps);
    for (const auto& [u, y] : window.data) {
        controls.push_back(u);
    }
    auto rollout = std::make_shared<ShootingRollout>(std::move(controls));

    const int dim = rollout->compact_dim();
    NlsProblem problem(dim);

    // Prior: 2 eta^N || x0 - anchor ||^2_{U_bar}, heading wrapped.
    const Eigen::Vector3d anchor = window.anchor.vec();
    problem.add_block(
        {3, cfg.U_bar, 2.0 * std::pow(cfg.eta, n_steps),
         [anchor, dim](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
             r.resize(3);
             r(0) = x(0) - anchor(0);
             r(1) = x(1) - anchor(1);
             r(2) = angle_diff(x(2), anchor(2));
             if (jac) {
                 jac->setZero(3, dim);
                 jac->leftCols<3>().setIdentity();
             }
         }});

    // Per window index i (time k - N + i): discount eta^(N-1-i).
    const Eigen::Matrix3d q_process = cfg.Q.topLeftCorner<3, 3>();
    for (int i = 0; i < n_steps; ++i) {
        const double discount = std::pow(cfg.eta, n_steps - 1 - i);

        problem.add_block(
            {3, q_process, 2.0 * discount,
             [i, dim](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
                 r = x.segment<3>(3 + 3 * i);
                 if (jac) {
                     jac->setZero(3, dim);
                     jac->middleCols<3>(3 + 3 * i).setIdentity();
                 }
             }});

        const Eigen::Vector3d y = window.data[i].second;
        problem.add_block(
            {3, cfg.R, discount,
             [y, i, rollout](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
                 rollout->ensure(x);
                 const Eigen::Vector3d state = rollout->state(i).vec();
                 r.resize(3);
                 r(0) = y(0) - state(0);
                 r(1) = y(1) - state(1);
                 r(2) = angle_diff(y(2), state(2));
                 if (jac) {
                     *jac = -rollout->state_jacobian(i);
                 }
             }});
    }

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dim);
    if (warm_start && warm_start->size() == dim) {
        x0 = *warm_start;
    } else {
        x0.head<3>() = anchor;
    }

    EgoUpdateResult result;
    result.report = solve(problem, x0, cfg.solver);

    rollout->ensure(result.report.solution);
    result.smoothed.reserve(n_steps + 1);
    for (int i = 0; i <= n_steps; ++i) {
        EgoState s = rollout->state(i);
        s.theta = wrap_angle(s.theta);
        result.smoothed.push_back(s);
    }
    result.noises.reserve(n_steps);
    for (int i = 0; i < n_steps; ++i) {
        result.noises.push_back(
            ProcessNoise::from_vec(result.report.solution.segment<3>(3 + 3 * i)));
    }
    result.estimate = result.smoothed.back();
    return result;
}

EgoMheEstimator::EgoMheEstimator(EgoMheConfig cfg, const EgoState& initial_estimate)
    : cfg_(std::move(cfg)), estimate_(initial_estimate)
{
    cfg_.validate();
    estimates_.push_back(initial_estimate);
    if (cfg_.U_lower) {
        horizon_check_ = check_horizon_condition(cfg_.eta, cfg_.U_bar, *cfg_.U_lower, cfg_.N);
    }
}

Eigen::VectorXd EgoMheEstimator::shifted_warm_start(int window_size) const
{
    const int dim = 3 + 3 * window_size;
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dim);
    if (!warm_) {
        x0.head<3>() = estimates_.front().vec();
        return x0;
    }

    const int prev_size = (static_cast<int>(warm_->size()) - 3) / 3;
    if (window_size == prev_size + 1) {
        // Window still growing: same initial time, one fresh noise slot.
        x0.head(warm_->size()) = *warm_;
    } else {
        // Window slid by one: advance the initial state through the oldest
        // transition and shift the noise sequence.
        x0.head<3>() = last_.smoothed[1].vec();
        x0.segment(3, 3 * (prev_size - 1)) = warm_->tail(3 * (prev_size - 1));
    }
    return x0;
}

const EgoUpdateResult& EgoMheEstimator::step(const ControlInput& u, const Eigen::Vector3d& y_s)
{
    ++k_;
    window_.emplace_back(u, y_s);
    if (static_cast<int>(window_.size()) > cfg_.N) {
        window_.pop_front();
    }
    const int n = static_cast<int>(window_.size());

    // Keep exactly the estimates x̂_{k-n} .. x̂_{k-1}; front is the anchor.
    while (static_cast<int>(estimates_.size()) > n) {
        estimates_.pop_front();
    }

    EgoWindow window;
    window.data.assign(window_.begin(), window_.end());
    window.anchor = estimates_.front();

    const Eigen::VectorXd x0 = shifted_warm_start(n);
    last_ = ego_update(window, cfg_, &x0);

    estimate_ = last_.estimate;
    estimates_.push_back(estimate_);
    warm_ = last_.report.solution;
    return last_;
}

}  // namespace mheslam
