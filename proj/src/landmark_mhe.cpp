#include "mheslam/landmark_mhe.hpp"

#include <cmath>
#include <exception>
#include <thread>

#include "mheslam/errors.hpp"
#include "mheslam/matrix_checks.hpp"
#include "mheslam/models.hpp"

namespace mheslam {

void LandmarkMheConfig::validate() const
{
    if (eta < 0.0 || eta >= 1.0) {
        throw InvalidParam("eta must lie in [0, 1)");
    }
    if (M < 1) {
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
    if (gate_policy.kind == GatePolicy::Kind::RangeGramian && gramian_threshold() <= 0.0) {
        throw InvalidParam("gramian gate threshold must be positive");
    }
}

double LandmarkMheConfig::gramian_threshold() const
{
    if (gate_policy.min_eig_threshold > 0.0) {
        return gate_policy.min_eig_threshold;
    }
    return 0.5 * M * min_eigenvalue(R);
}

void append_observation(LandmarkTrack& track, TrackObservation obs, int M)
{
    track.buffer.push_back(std::move(obs));
    while (static_cast<int>(track.buffer.size()) > M) {
        track.buffer.pop_front();
    }
}

Eigen::Matrix2d window_gramian(const LandmarkTrack& track, const Eigen::Matrix2d& R_e)
{
    Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
    for (const auto& obs : track.buffer) {
        if (obs.visible) {
            const Eigen::Matrix2d rot = rotation(-obs.ego.theta);
            g += rot.transpose() * R_e * rot;
        }
    }
    return g;
}

bool gate(const LandmarkTrack& track, const LandmarkMheConfig& cfg)
{
    if (static_cast<int>(track.buffer.size()) < cfg.M) {
        return false;
    }
    // Disjoint horizons: the previous update must lie at least M steps back.
    const int current_step = track.buffer.back().step + 1;
    if (track.last_update_step && current_step - *track.last_update_step < cfg.M) {
        return false;
    }

    if (cfg.gate_policy.kind == GatePolicy::Kind::FullVisibility) {
        for (const auto& obs : track.buffer) {
            if (!obs.visible) {
                return false;
            }
        }
        return true;
    }
    return min_eigenvalue(window_gramian(track, cfg.R)) >= cfg.gramian_threshold();
}

LandmarkState landmark_update(LandmarkTrack& track, const LandmarkMheConfig& cfg,
                              const SensorModel& sensor)
{
    if (track.buffer.empty()) {
        throw InvalidParam("landmark window is empty");
    }

    NlsProblem problem(2);

    const Eigen::Vector2d anchor = track.estimate.vec();
    problem.add_block(
        {2, cfg.U_bar, 2.0 * std::pow(cfg.eta, cfg.M),
         [anchor](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
             r = x - anchor;
             if (jac) {
                 *jac = Eigen::Matrix2d::Identity();
             }
         }});

    const int newest = track.buffer.back().step;
    for (const auto& obs : track.buffer) {
        if (!obs.visible) {
            continue;
        }
        const EgoState ego = obs.ego;
        const Eigen::Vector2d y = *obs.y;
        const double discount = std::pow(cfg.eta, newest - obs.step);
        problem.add_block(
            {2, cfg.R, discount,
             [ego, y, sensor](const Eigen::VectorXd& x, Eigen::VectorXd& r,
                              Eigen::MatrixXd* jac) {
                 const LandmarkState lm = LandmarkState::from_vec(x);
                 r = y - landmark_measurement(ego, lm, sensor);
                 if (jac) {
                     *jac = -landmark_measurement_jacobian_landmark(ego, lm, sensor);
                 }
             }});
    }

    const SolveReport report = solve(problem, anchor, cfg.solver);
    if (!report.solution.allFinite()) {
        throw NumericalFailure("landmark update produced a non-finite estimate");
    }

    track.estimate = LandmarkState::from_vec(report.solution);
    track.m += 1;
    track.last_update_step = newest + 1;
    return track.estimate;
}

namespace {

void gate_and_update(LandmarkTrack& track, const LandmarkMheConfig& cfg,
                     const SensorModel& sensor)
{
    track.last_update_failed = false;
    track.last_gate = gate(track, cfg);
    if (!track.last_gate) {
        return;
    }
    try {
        landmark_update(track, cfg, sensor);
    } catch (const std::exception&) {
        // Estimate held; m untouched. Other tracks are unaffected.
        track.last_update_failed = true;
    }
}

}  // namespace

void step_all(std::vector<LandmarkTrack>& tracks, const MeasurementFrame& frame,
              const EgoState& ego_estimate_for_frame, const LandmarkMheConfig& cfg,
              const SensorModel& sensor, int workers)
{
    for (auto& track : tracks) {
        TrackObservation obs;
        obs.step = frame.k;
        obs.ego = ego_estimate_for_frame;
        obs.visible = track.id >= 0 && track.id < static_cast<int>(frame.a.size()) &&
                      frame.a[track.id] != 0;
        if (obs.visible) {
            obs.y = frame.measurement_of(track.id);
            if (!obs.y) {
                throw LengthMismatch("visibility bit set without a measurement");
            }
        }
        append_observation(track, std::move(obs), cfg.M);
    }

    const int n = static_cast<int>(tracks.size());
    if (workers <= 1 || n <= 1) {
        for (auto& track : tracks) {
            gate_and_update(track, cfg, sensor);
        }
        return;
    }

    const int thread_count = std::min(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (int w = 0; w < thread_count; ++w) {
        pool.emplace_back([&, w]() {
            for (int i = w; i < n; i += thread_count) {
                gate_and_update(tracks[i], cfg, sensor);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
}

}  // namespace mheslam
