#pragma once

#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mheslam/nls_solver.hpp"
#include "mheslam/types.hpp"

namespace mheslam {

/// Weights and horizon of the ego-state window cost. Q is 6x6 over the
/// combined process and measurement noise; only its upper-left 3x3 enters the
/// solved problem because the measurement noise is eliminated into the fit
/// residual (see ego_update).
struct EgoMheConfig {
    double eta = 0.99;
    Eigen::Matrix3d U_bar = 0.001 * Eigen::Matrix3d::Identity();
    Eigen::Matrix<double, 6, 6> Q = Eigen::Matrix<double, 6, 6>::Identity();
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    int N = 20;

    /// Optional lower i-IOSS bound; enables the horizon condition check.
    std::optional<Eigen::Matrix3d> U_lower;

    SolveOptions solver;

    void validate() const;  // throws InvalidParam
};

/// Rolling window of (u_j, y_j) pairs, oldest first, plus the prior anchor
/// (the estimate produced window-length steps earlier).
struct EgoWindow {
    std::vector<std::pair<ControlInput, Eigen::Vector3d>> data;
    EgoState anchor;
};

struct EgoUpdateResult {
    EgoState estimate;                 // terminal smoothed state
    std::vector<EgoState> smoothed;    // window states, length N+1
    std::vector<ProcessNoise> noises;  // estimated process noise, length N
    SolveReport report;
};

/// Solves the ego window problem over (initial state, process-noise sequence)
/// with single shooting. Decision layout: [x0 (3), v_0 .. v_{N-1} (3 each)].
EgoUpdateResult ego_update(const EgoWindow& window, const EgoMheConfig& cfg,
                           const Eigen::VectorXd* warm_start = nullptr);

/// Stateful per-robot estimator: owns the window, the anchor bookkeeping and
/// the warm start. step() consumes the pair (u_j, y_j) measured at time j and
/// returns the estimate of the state at time j+1.
class EgoMheEstimator {
public:
    EgoMheEstimator(EgoMheConfig cfg, const EgoState& initial_estimate);

    const EgoUpdateResult& step(const ControlInput& u, const Eigen::Vector3d& y_s);

    const EgoState& estimate() const { return estimate_; }
    int step_count() const { return k_; }
    const EgoMheConfig& config() const { return cfg_; }

    /// Present when the config carries U_lower.
    const std::optional<HorizonCheck>& horizon_check() const { return horizon_check_; }

private:
    Eigen::VectorXd shifted_warm_start(int window_size) const;

    EgoMheConfig cfg_;
    std::deque<std::pair<ControlInput, Eigen::Vector3d>> window_;
    std::deque<EgoState> estimates_;  // trailing estimates, front = anchor
    EgoState estimate_;
    std::optional<Eigen::VectorXd> warm_;
    EgoUpdateResult last_;
    int k_ = 0;
    std::optional<HorizonCheck> horizon_check_;
};

}  // namespace mheslam
