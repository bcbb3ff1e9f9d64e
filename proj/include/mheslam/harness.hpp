#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mheslam/coupled_mhe.hpp"
#include "mheslam/ego_mhe.hpp"
#include "mheslam/landmark_mhe.hpp"
#include "mheslam/metrics.hpp"
#include "mheslam/simulator.hpp"

namespace mheslam {

enum class Method { Decoupled, Coupled, Rls };

std::string method_name(Method method);
Method method_from_name(const std::string& name);

/// Full experiment description: which scenario, which estimator stack, and
/// where outputs go. Presets "circular" and "corridor" carry the default
/// geometry, noise level 0.01, discount 0.99 and horizon 20.
struct ExperimentConfig {
    std::string scenario = "circular";  // preset name or path to a scenario JSON
    std::optional<Scenario> scenario_inline;

    Method method = Method::Decoupled;
    EgoMheConfig ego;
    LandmarkMheConfig landmark;

    std::uint64_t seed = 0;
    int workers = 1;
    std::string out_dir;  // empty: no files written

    // Scenario overrides, applied after the preset/file is loaded.
    std::optional<int> T;
    std::optional<double> noise_std;
    std::optional<SensorKind> sensor_kind;

    /// Added to the true initial state to form the initial ego estimate.
    Eigen::Vector3d initial_ego_offset = Eigen::Vector3d::Zero();

    /// Initial landmark estimates; defaults to the origin for every landmark.
    std::optional<std::vector<LandmarkState>> initial_landmarks;
    bool initial_landmarks_at_truth = false;
};

struct ExperimentResult {
    Method method = Method::Decoupled;
    TrajectoryLog log;
    EstimateLog estimates;
    ErrorTrace trace;

    std::vector<std::vector<std::uint8_t>> gated;  // [step][landmark]
    std::vector<std::vector<int>> m_history;       // [step][landmark]
    std::vector<int> final_m;

    double mean_ego_error = 0.0;
    double final_ego_error = 0.0;
    double mean_lm_error = 0.0;
    double final_lm_error = 0.0;
    double mean_step_ms = 0.0;
    double mean_ego_ms = 0.0;
    double mean_lm_ms = 0.0;
};

/// Resolves the preset/file/inline scenario and applies the overrides.
Scenario build_scenario_for(const ExperimentConfig& cfg);

/// Simulates, runs the selected pipeline, computes traces, and (when out_dir
/// is set) writes scenario.json, trajectory.csv, ego_trace.csv, lm_trace.csv,
/// metrics.csv and summary.json.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct MethodSummary {
    Method method = Method::Decoupled;
    double mean_ego_error = 0.0;
    double mean_lm_error = 0.0;
    double mean_step_ms = 0.0;
};

struct ComparisonReport {
    std::vector<MethodSummary> summaries;
    /// Ratios of each entry against the first: error_ratio[i] is
    /// mean_ego_error[i] / mean_ego_error[0], timing likewise.
    std::vector<double> ego_error_ratio;
    std::vector<double> timing_ratio;
};

/// Runs each config on identical data; all configs must share scenario, seed
/// and T. Writes comparison.json into the first non-empty out_dir.
ComparisonReport run_comparison(const std::vector<ExperimentConfig>& cfgs);

/// Parses the --config JSON document into an ExperimentConfig.
ExperimentConfig experiment_config_from_json(const std::string& json_text);

}  // namespace mheslam
