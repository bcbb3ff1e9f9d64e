#pragma once

#include <deque>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mheslam/nls_solver.hpp"
#include "mheslam/simulator.hpp"
#include "mheslam/types.hpp"

namespace mheslam {

/// Decides when a landmark window is informative enough for an update.
/// FullVisibility requires every buffered step visible; RangeGramian accepts
/// partial visibility once the accumulated regressor Gramian is well
/// conditioned. Both require disjointness from the previous update.
struct GatePolicy {
    enum class Kind { FullVisibility, RangeGramian };
    Kind kind = Kind::FullVisibility;

    /// RangeGramian only; values <= 0 select the default 0.5 * M * lambda_min(R).
    double min_eig_threshold = 0.0;
};

struct LandmarkMheConfig {
    double eta = 0.99;
    Eigen::Matrix2d U_bar = 0.01 * Eigen::Matrix2d::Identity();
    Eigen::Matrix2d Q = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d R = 0.1 * Eigen::Matrix2d::Identity();
    int M = 20;
    GatePolicy gate_policy;
    SolveOptions solver;

    void validate() const;  // throws InvalidParam
    double gramian_threshold() const;
};

/// One buffered step of landmark data: the ego estimate for that step and the
/// measurement when the landmark was visible.
struct TrackObservation {
    int step = 0;
    EgoState ego;
    std::optional<Eigen::Vector2d> y;
    bool visible = false;
};

/// Per-landmark estimator state. The estimate changes only at steps where the
/// gate passed; m counts disjoint informative horizons consumed.
struct LandmarkTrack {
    int id = 0;
    LandmarkState estimate;
    int m = 0;
    std::optional<int> last_update_step;
    std::deque<TrackObservation> buffer;
    bool last_gate = false;
    bool last_update_failed = false;
};

/// Appends one observation, dropping the oldest beyond M.
void append_observation(LandmarkTrack& track, TrackObservation obs, int M);

/// True iff the buffered window authorizes an update under the policy.
bool gate(const LandmarkTrack& track, const LandmarkMheConfig& cfg);

/// Accumulated regressor Gramian sum_j a_j R(-theta_j)^T R R(-theta_j) over
/// the buffer.
Eigen::Matrix2d window_gramian(const LandmarkTrack& track, const Eigen::Matrix2d& R_e);

/// Solves the single-landmark window problem with the buffered ego estimates
/// held fixed; mutates the track (estimate, m, last_update_step) on success.
/// Requires gate() true. Throws on solver failure, leaving the track intact.
LandmarkState landmark_update(LandmarkTrack& track, const LandmarkMheConfig& cfg,
                              const SensorModel& sensor);

/// Appends the frame to every track, then gates and updates each track
/// independently. Per-track failures hold that track's estimate and never
/// affect the others. Results are identical for any worker count.
void step_all(std::vector<LandmarkTrack>& tracks, const MeasurementFrame& frame,
              const EgoState& ego_estimate_for_frame, const LandmarkMheConfig& cfg,
              const SensorModel& sensor, int workers = 1);

}  // namespace mheslam
