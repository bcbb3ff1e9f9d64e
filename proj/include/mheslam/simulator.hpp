#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mheslam/types.hpp"

namespace mheslam {

/// Per-channel Gaussian noise standard deviations, independent across time
/// and channels.
struct NoiseSpec {
    Eigen::Vector3d std_process = Eigen::Vector3d::Zero();
    Eigen::Vector3d std_ego_meas = Eigen::Vector3d::Zero();
    Eigen::Vector2d std_lm_meas = Eigen::Vector2d::Zero();

    NoiseSpec() = default;
    explicit NoiseSpec(double std_all)
        : std_process(Eigen::Vector3d::Constant(std_all)),
          std_ego_meas(Eigen::Vector3d::Constant(std_all)),
          std_lm_meas(Eigen::Vector2d::Constant(std_all))
    {
    }
};

/// Control sequence: either one constant input or an explicit per-step list
/// (clamped to its last entry past the end).
class ControlSchedule {
public:
    ControlSchedule() = default;
    static ControlSchedule constant(ControlInput u);
    static ControlSchedule sequence(std::vector<ControlInput> inputs);

    ControlInput operator()(int step) const;
    bool is_constant() const { return inputs_.size() == 1; }
    const std::vector<ControlInput>& inputs() const { return inputs_; }

private:
    std::vector<ControlInput> inputs_ = {ControlInput{}};
};

struct Scenario {
    std::vector<LandmarkState> landmarks;
    ControlSchedule controls;
    SensorModel sensor;
    NoiseSpec noise;
    int T = 1;
    std::uint64_t seed = 0;
    EgoState initial_state;
    std::string name;
};

/// Everything the estimators see at one step: the ego measurement, the sparse
/// landmark measurements for visible ids, the visibility bits, and the
/// control applied at this step.
struct MeasurementFrame {
    int k = 0;
    Eigen::Vector3d y_s = Eigen::Vector3d::Zero();
    std::vector<std::pair<int, Eigen::Vector2d>> y_e;  // visible ids only, ascending
    std::vector<std::uint8_t> a;                       // visibility bits, length L
    ControlInput u;

    std::optional<Eigen::Vector2d> measurement_of(int landmark_id) const;
};

struct TrajectoryLog {
    std::vector<EgoState> truth;           // length T + 1
    std::vector<MeasurementFrame> frames;  // length T
    Scenario scenario;
};

struct CircularScenarioParams {
    int L = 50;
    double traj_radius = 2.0;
    double landmark_radius = 2.5;
    double sensor_range = 2.0;
    double angular_step = 0.05;  // rad per step
    NoiseSpec noise;
    int T = 300;
    std::uint64_t seed = 0;
    SensorKind sensor_kind = SensorKind::BearingOnly;
};

struct CorridorScenarioParams {
    int L = 50;
    double corridor_length = 25.0;
    double row_offset = 1.5;  // rows at y = +/- row_offset
    double sensor_range = 3.0;
    double speed = 0.1;  // m per step
    NoiseSpec noise;
    int T = 400;
    std::uint64_t seed = 0;
    SensorKind sensor_kind = SensorKind::BearingOnly;
};

/// Landmarks on a circle concentric with a circular robot trajectory.
Scenario build_circular_scenario(const CircularScenarioParams& params);

/// Landmarks in two rows flanking a straight trajectory along +x.
Scenario build_corridor_scenario(const CorridorScenarioParams& params);

/// Simulates the scenario forward with seeded Gaussian noise.
TrajectoryLog run(const Scenario& scenario);

std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& json_text);

/// One row per step: k, truth pose, y_s, visibility mask, then id,y1,y2
/// triples for each visible landmark.
void export_trajectory_csv(const TrajectoryLog& log, std::ostream& out);

}  // namespace mheslam
