#include "mheslam/metrics.hpp"

#include <cmath>
#include <ostream>

#include "mheslam/angles.hpp"
#include "mheslam/csv.hpp"
#include "mheslam/errors.hpp"

namespace mheslam {

double ego_error_norm(const EgoState& estimate, const EgoState& truth)
{
    const double dx = estimate.px - truth.px;
    const double dy = estimate.py - truth.py;
    const double dt = angle_diff(estimate.theta, truth.theta);
    return std::sqrt(dx * dx + dy * dy + dt * dt);
}

ErrorTrace compute_traces(const TrajectoryLog& log, const EstimateLog& estimates)
{
    const int T = log.scenario.T;
    if (static_cast<int>(estimates.ego.size()) != T ||
        static_cast<int>(estimates.landmarks.size()) != T ||
        static_cast<int>(log.truth.size()) != T + 1) {
        throw LengthMismatch("estimate log length does not match trajectory length");
    }
    const std::size_t L = log.scenario.landmarks.size();

    ErrorTrace trace;
    trace.ego_error.reserve(T);
    trace.avg_lm_error.reserve(T);
    for (int k = 0; k < T; ++k) {
        trace.ego_error.push_back(ego_error_norm(estimates.ego[k], log.truth[k + 1]));

        if (estimates.landmarks[k].size() != L) {
            throw LengthMismatch("landmark estimate count does not match scenario");
        }
        double sum = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            sum += (estimates.landmarks[k][l].vec() - log.scenario.landmarks[l].vec()).norm();
        }
        trace.avg_lm_error.push_back(sum / static_cast<double>(L));
    }
    trace.times = estimates.times;
    if (trace.times.empty()) {
        trace.times.resize(T);
    } else if (static_cast<int>(trace.times.size()) != T) {
        throw LengthMismatch("timing log length does not match trajectory length");
    }
    return trace;
}

DecayFit fit_decay_rate(std::span<const double> trace, int begin, int end, double floor)
{
    begin = std::max(begin, 0);
    end = std::min(end, static_cast<int>(trace.size()));

    std::vector<std::pair<double, double>> points;  // (k, log e_k)
    for (int k = begin; k < end; ++k) {
        if (trace[k] > floor && std::isfinite(trace[k])) {
            points.emplace_back(static_cast<double>(k), std::log(trace[k]));
        }
    }
    if (points.size() < 5) {
        throw InsufficientData("need at least 5 positive points to fit a decay rate");
    }

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(points.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;

    DecayFit fit;
    fit.lambda = std::exp(slope);
    fit.C = std::exp(intercept);
    fit.points_used = static_cast<int>(points.size());
    return fit;
}

void export_metrics_csv(const ErrorTrace& trace, std::ostream& out)
{
    out << "k,ego_err,avg_lm_err,t_ego_ms,t_lm_mean_ms,t_total_ms\n";
    for (std::size_t i = 0; i < trace.ego_error.size(); ++i) {
        const StepTimes& t = trace.times[i];
        out << (i + 1) << ',' << csv_double(trace.ego_error[i]) << ','
            << csv_double(trace.avg_lm_error[i]) << ',' << csv_double(t.ego_ms) << ','
            << csv_double(t.lm_mean_ms) << ',' << csv_double(t.total_ms) << '\n';
    }
}

}  // namespace mheslam
