#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "mheslam/simulator.hpp"
#include "mheslam/types.hpp"

namespace mheslam {

struct StepTimes {
    double ego_ms = 0.0;
    double lm_mean_ms = 0.0;
    double total_ms = 0.0;
};

/// Per-step estimator output aligned with steps k = 1..T: the ego estimate
/// after frame k-1, the landmark estimates at that step, and the wall times.
struct EstimateLog {
    std::vector<EgoState> ego;
    std::vector<std::vector<LandmarkState>> landmarks;  // [step][landmark]
    std::vector<StepTimes> times;
};

struct ErrorTrace {
    std::vector<double> ego_error;     // position-and-heading norm, wrapped heading
    std::vector<double> avg_lm_error;  // mean over landmarks of position error
    std::vector<StepTimes> times;
};

/// Wrapped-heading ego error norm || (dx, dy, wrap(dtheta)) ||.
double ego_error_norm(const EgoState& estimate, const EgoState& truth);

ErrorTrace compute_traces(const TrajectoryLog& log, const EstimateLog& estimates);

struct DecayFit {
    double C = 0.0;
    double lambda = 0.0;
    int points_used = 0;
};

/// Least-squares line fit on log(error) over trace indices [begin, end),
/// skipping entries at or below `floor`. Throws InsufficientData below 5
/// usable points.
DecayFit fit_decay_rate(std::span<const double> trace, int begin, int end, double floor = 0.0);

/// CSV: k, ego_err, avg_lm_err, t_ego_ms, t_lm_mean_ms, t_total_ms.
void export_metrics_csv(const ErrorTrace& trace, std::ostream& out);

}  // namespace mheslam
