#include "mheslam/coupled_mhe.hpp"

#include <cmath>
#include <memory>

#include "mheslam/angles.hpp"
#include "mheslam/errors.hpp"
#include "mheslam/matrix_checks.hpp"
#include "mheslam/models.hpp"
#include "mheslam/shooting.hpp"

namespace mheslam {

Eigen::VectorXd AugmentedState::vec() const
{
    Eigen::VectorXd v(dimension());
    v.head<3>() = ego.vec();
    for (std::size_t l = 0; l < landmarks.size(); ++l) {
        v.segment<2>(3 + 2 * static_cast<int>(l)) = landmarks[l].vec();
    }
    return v;
}

AugmentedState AugmentedState::from_vec(const Eigen::VectorXd& v)
{
    if (v.size() < 3 || (v.size() - 3) % 2 != 0) {
        throw InvalidParam("augmented state vector has invalid dimension");
    }
    AugmentedState s;
    s.ego = EgoState::from_vec(v.head<3>());
    const int L = static_cast<int>((v.size() - 3) / 2);
    s.landmarks.reserve(L);
    for (int l = 0; l < L; ++l) {
        s.landmarks.push_back(LandmarkState::from_vec(v.segment<2>(3 + 2 * l)));
    }
    return s;
}

void CoupledMheConfig::validate() const
{
    if (eta < 0.0 || eta >= 1.0) {
        throw InvalidParam("eta must lie in [0, 1)");
    }
    if (M < 1) {
        throw InvalidParam("horizon must be at least 1");
    }
    if (!is_symmetric_pd(U_bar_ego) || !is_symmetric_pd(U_bar_lm)) {
        throw InvalidParam("prior weights must be symmetric positive definite");
    }
    if (!is_symmetric_psd(Q) || !is_symmetric_psd(R_ego) || !is_symmetric_psd(R_lm)) {
        throw InvalidParam("Q and R weights must be symmetric positive semidefinite");
    }
}

CoupledUpdateResult coupled_update(const CoupledWindow& window, const CoupledMheConfig& cfg,
                                   const SensorModel& sensor, const Eigen::VectorXd* warm_start)
{
    const int n_steps = static_cast<int>(window.data.size());
    if (n_steps < 1) {
        throw InvalidParam("coupled window must not be empty");
    }
    const int L = static_cast<int>(window.anchor.landmarks.size());
    const int lm_dim = 2 * L;
    const int dim = 3 + lm_dim + 3 * n_steps;

    std::vector<ControlInput> controls;
    controls.reserve(n_steps);
    for (const auto& frame : window.data) {
        controls.push_back(frame.u);
    }
    auto rollout = std::make_shared<ShootingRollout>(std::move(controls));

    // Ego rollout sees the compact coordinates [x0_ego, v...]; landmark
    // columns sit in between in the full decision vector.
    auto compact_of = [lm_dim, n_steps](const Eigen::VectorXd& x) {
        Eigen::VectorXd compact(3 + 3 * n_steps);
        compact.head<3>() = x.head<3>();
        compact.tail(3 * n_steps) = x.tail(3 * n_steps);
        return compact;
    };
    auto scatter_state_jacobian = [lm_dim, dim](const Eigen::MatrixXd& g) {
        Eigen::MatrixXd full = Eigen::MatrixXd::Zero(3, dim);
        full.leftCols<3>() = g.leftCols<3>();
        full.rightCols(g.cols() - 3) = g.rightCols(g.cols() - 3);
        return full;
    };

    NlsProblem problem(dim);

    // Prior over the full augmented initial state.
    {
        Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(3 + lm_dim, 3 + lm_dim);
        weight.topLeftCorner<3, 3>() = cfg.U_bar_ego;
        for (int l = 0; l < L; ++l) {
            weight.block<2, 2>(3 + 2 * l, 3 + 2 * l) = cfg.U_bar_lm;
        }
        const Eigen::VectorXd anchor = window.anchor.vec();
        problem.add_block(
            {3 + lm_dim, weight, 2.0 * std::pow(cfg.eta, n_steps),
             [anchor, lm_dim, dim](const Eigen::VectorXd& x, Eigen::VectorXd& r,
                                   Eigen::MatrixXd* jac) {
                 r = x.head(3 + lm_dim) - anchor;
                 r(2) = angle_diff(x(2), anchor(2));
                 if (jac) {
                     jac->setZero(3 + lm_dim, dim);
                     jac->leftCols(3 + lm_dim).setIdentity();
                 }
             }});
    }

    const Eigen::Matrix3d q_process = cfg.Q.topLeftCorner<3, 3>();
    for (int i = 0; i < n_steps; ++i) {
        const double discount = std::pow(cfg.eta, n_steps - 1 - i);
        const int v_col = 3 + lm_dim + 3 * i;

        problem.add_block(
            {3, q_process, 2.0 * discount,
             [v_col, dim](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
                 r = x.segment<3>(v_col);
                 if (jac) {
                     jac->setZero(3, dim);
                     jac->middleCols<3>(v_col).setIdentity();
                 }
             }});

        const Eigen::Vector3d y_s = window.data[i].y_s;
        problem.add_block(
            {3, cfg.R_ego, discount,
             [y_s, i, rollout, compact_of, scatter_state_jacobian](
                 const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
                 rollout->ensure(compact_of(x));
                 const Eigen::Vector3d state = rollout->state(i).vec();
                 r.resize(3);
                 r(0) = y_s(0) - state(0);
                 r(1) = y_s(1) - state(1);
                 r(2) = angle_diff(y_s(2), state(2));
                 if (jac) {
                     *jac = -scatter_state_jacobian(rollout->state_jacobian(i));
                 }
             }});

        for (const auto& [lm_id, y_e] : window.data[i].y_e) {
            if (lm_id < 0 || lm_id >= L) {
                throw LengthMismatch("landmark id outside augmented state");
            }
            const int lm_col = 3 + 2 * lm_id;
            const Eigen::Vector2d y = y_e;
            problem.add_block(
                {2, cfg.R_lm, discount,
                 [y, i, lm_col, sensor, rollout, compact_of, scatter_state_jacobian](
                     const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
                     rollout->ensure(compact_of(x));
                     const EgoState pose = rollout->state(i);
                     const LandmarkState lm = LandmarkState::from_vec(x.segment<2>(lm_col));
                     r = y - landmark_measurement(pose, lm, sensor);
                     if (jac) {
                         const Eigen::MatrixXd pose_jac =
                             scatter_state_jacobian(rollout->state_jacobian(i));
                         jac->noalias() =
                             -landmark_measurement_jacobian_ego(pose, lm, sensor) * pose_jac;
                         jac->middleCols<2>(lm_col) -=
                             landmark_measurement_jacobian_landmark(pose, lm, sensor);
                     }
                 }});
        }
    }

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dim);
    if (warm_start && warm_start->size() == dim) {
        x0 = *warm_start;
    } else {
        x0.head(3 + lm_dim) = window.anchor.vec();
    }

    CoupledUpdateResult result;
    result.report = solve(problem, x0, cfg.solver);

    rollout->ensure(compact_of(result.report.solution));
    result.smoothed.reserve(n_steps + 1);
    for (int i = 0; i <= n_steps; ++i) {
        EgoState s = rollout->state(i);
        s.theta = wrap_angle(s.theta);
        result.smoothed.push_back(s);
    }
    result.estimate.ego = result.smoothed.back();
    result.estimate.landmarks.reserve(L);
    for (int l = 0; l < L; ++l) {
        result.estimate.landmarks.push_back(
            LandmarkState::from_vec(result.report.solution.segment<2>(3 + 2 * l)));
    }
    return result;
}

CoupledMheEstimator::CoupledMheEstimator(CoupledMheConfig cfg, SensorModel sensor,
                                         AugmentedState initial_estimate)
    : cfg_(std::move(cfg)),
      sensor_(sensor),
      num_landmarks_(static_cast<int>(initial_estimate.landmarks.size())),
      estimate_(std::move(initial_estimate))
{
    cfg_.validate();
    estimates_.push_back(estimate_);
}

Eigen::VectorXd CoupledMheEstimator::shifted_warm_start(int window_size) const
{
    const int lm_dim = 2 * num_landmarks_;
    const int dim = 3 + lm_dim + 3 * window_size;
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dim);
    if (!warm_) {
        x0.head(3 + lm_dim) = estimates_.front().vec();
        return x0;
    }

    const int prev_size = (static_cast<int>(warm_->size()) - 3 - lm_dim) / 3;
    if (window_size == prev_size + 1) {
        x0.head(warm_->size()) = *warm_;
    } else {
        x0.head<3>() = last_.smoothed[1].vec();
        x0.segment(3, lm_dim) = warm_->segment(3, lm_dim);
        x0.segment(3 + lm_dim, 3 * (prev_size - 1)) = warm_->tail(3 * (prev_size - 1));
    }
    return x0;
}

const CoupledUpdateResult& CoupledMheEstimator::step(const MeasurementFrame& frame)
{
    ++k_;
    window_.push_back(frame);
    if (static_cast<int>(window_.size()) > cfg_.M) {
        window_.pop_front();
    }
    const int n = static_cast<int>(window_.size());

    while (static_cast<int>(estimates_.size()) > n) {
        estimates_.pop_front();
    }

    CoupledWindow window;
    window.data.assign(window_.begin(), window_.end());
    window.anchor = estimates_.front();

    const Eigen::VectorXd x0 = shifted_warm_start(n);
    last_ = coupled_update(window, cfg_, sensor_, &x0);

    estimate_ = last_.estimate;
    estimates_.push_back(estimate_);
    warm_ = last_.report.solution;
    return last_;
}

}  // namespace mheslam
