#pragma once

#include <deque>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mheslam/nls_solver.hpp"
#include "mheslam/simulator.hpp"
#include "mheslam/types.hpp"

namespace mheslam {

/// Ego pose stacked with all landmark positions; dimension 3 + 2L.
struct AugmentedState {
    EgoState ego;
    std::vector<LandmarkState> landmarks;

    int dimension() const { return 3 + 2 * static_cast<int>(landmarks.size()); }
    Eigen::VectorXd vec() const;
    static AugmentedState from_vec(const Eigen::VectorXd& v);
};

struct CoupledMheConfig {
    double eta = 0.99;
    Eigen::Matrix3d U_bar_ego = 0.001 * Eigen::Matrix3d::Identity();
    Eigen::Matrix2d U_bar_lm = 0.01 * Eigen::Matrix2d::Identity();
    Eigen::Matrix<double, 6, 6> Q = Eigen::Matrix<double, 6, 6>::Identity();
    Eigen::Matrix3d R_ego = Eigen::Matrix3d::Identity();
    Eigen::Matrix2d R_lm = 0.1 * Eigen::Matrix2d::Identity();
    int M = 20;
    SolveOptions solver;

    void validate() const;
};

struct CoupledWindow {
    std::vector<MeasurementFrame> data;  // oldest first
    AugmentedState anchor;
};

struct CoupledUpdateResult {
    AugmentedState estimate;
    std::vector<EgoState> smoothed;  // ego window states, length N+1
    SolveReport report;
};

/// One joint solve over (augmented initial state, process-noise sequence).
/// Landmarks are static over the window; only visible landmark measurements
/// contribute fit terms. Decision layout: [x0_ego (3), landmarks (2L),
/// v_0 .. v_{N-1} (3 each)].
CoupledUpdateResult coupled_update(const CoupledWindow& window, const CoupledMheConfig& cfg,
                                   const SensorModel& sensor,
                                   const Eigen::VectorXd* warm_start = nullptr);

/// Stateful baseline estimator over the augmented state; one monolithic,
/// single-threaded solve per step.
class CoupledMheEstimator {
public:
    CoupledMheEstimator(CoupledMheConfig cfg, SensorModel sensor, AugmentedState initial_estimate);

    const CoupledUpdateResult& step(const MeasurementFrame& frame);

    const AugmentedState& estimate() const { return estimate_; }
    int step_count() const { return k_; }

private:
    Eigen::VectorXd shifted_warm_start(int window_size) const;

    CoupledMheConfig cfg_;
    SensorModel sensor_;
    int num_landmarks_;
    std::deque<MeasurementFrame> window_;
    std::deque<AugmentedState> estimates_;
    AugmentedState estimate_;
    std::optional<Eigen::VectorXd> warm_;
    CoupledUpdateResult last_;
    int k_ = 0;
};

}  // namespace mheslam
