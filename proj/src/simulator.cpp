#include "mheslam/simulator.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include <json.hpp>

#include "mheslam/csv.hpp"
#include "mheslam/errors.hpp"
#include "mheslam/models.hpp"

namespace mheslam {

ControlSchedule ControlSchedule::constant(ControlInput u)
{
    ControlSchedule s;
    s.inputs_ = {u};
    return s;
}

ControlSchedule ControlSchedule::sequence(std::vector<ControlInput> inputs)
{
    if (inputs.empty()) {
        throw InvalidParam("control sequence must not be empty");
    }
    ControlSchedule s;
    s.inputs_ = std::move(inputs);
    return s;
}

ControlInput ControlSchedule::operator()(int step) const
{
    if (step < 0) {
        step = 0;
    }
    const auto idx = static_cast<std::size_t>(step);
    return idx < inputs_.size() ? inputs_[idx] : inputs_.back();
}

std::optional<Eigen::Vector2d> MeasurementFrame::measurement_of(int landmark_id) const
{
    for (const auto& [id, y] : y_e) {
        if (id == landmark_id) {
            return y;
        }
    }
    return std::nullopt;
}

Scenario build_circular_scenario(const CircularScenarioParams& params)
{
    if (params.L < 1) {
        throw InvalidParam("need at least one landmark");
    }
    if (params.T < 1) {
        throw InvalidParam("need at least one step");
    }
    if (params.traj_radius <= 0.0 || params.landmark_radius <= 0.0 ||
        params.sensor_range <= 0.0) {
        throw InvalidParam("radii and sensor range must be positive");
    }

    Scenario scenario;
    scenario.name = "circular";
    scenario.T = params.T;
    scenario.seed = params.seed;
    scenario.noise = params.noise;
    scenario.sensor = SensorModel{params.sensor_kind, 1e-3, params.sensor_range};

    scenario.landmarks.reserve(params.L);
    for (int l = 0; l < params.L; ++l) {
        const double phi = 2.0 * std::numbers::pi * l / params.L;
        scenario.landmarks.push_back(
            {params.landmark_radius * std::cos(phi), params.landmark_radius * std::sin(phi)});
    }

    // Chord stepping keeps the true trajectory exactly on the circle.
    const double chord = 2.0 * params.traj_radius * std::sin(params.angular_step / 2.0);
    scenario.controls = ControlSchedule::constant({chord, params.angular_step});
    scenario.initial_state = {params.traj_radius, 0.0,
                              std::numbers::pi / 2.0 + params.angular_step / 2.0};
    return scenario;
}

Scenario build_corridor_scenario(const CorridorScenarioParams& params)
{
    if (params.L < 1) {
        throw InvalidParam("need at least one landmark");
    }
    if (params.T < 1) {
        throw InvalidParam("need at least one step");
    }
    if (params.corridor_length <= 0.0 || params.sensor_range <= 0.0 || params.speed <= 0.0) {
        throw InvalidParam("corridor length, sensor range and speed must be positive");
    }

    Scenario scenario;
    scenario.name = "corridor";
    scenario.T = params.T;
    scenario.seed = params.seed;
    scenario.noise = params.noise;
    scenario.sensor = SensorModel{params.sensor_kind, 1e-3, params.sensor_range};

    // Two rows at y = +/- row_offset; odd counts put the extra one below.
    const int per_row = (params.L + 1) / 2;
    const double spacing = params.corridor_length / per_row;
    scenario.landmarks.reserve(params.L);
    for (int l = 0; l < params.L; ++l) {
        const int slot = l / 2;
        const double y = (l % 2 == 0) ? -params.row_offset : params.row_offset;
        scenario.landmarks.push_back({spacing * (slot + 1), y});
    }

    scenario.controls = ControlSchedule::constant({params.speed, 0.0});
    scenario.initial_state = {0.0, 0.0, 0.0};
    return scenario;
}

TrajectoryLog run(const Scenario& scenario)
{
    if (scenario.T < 1 || scenario.landmarks.empty()) {
        throw InvalidParam("scenario must have at least one step and one landmark");
    }

    std::mt19937_64 rng(scenario.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto draw = [&](double std_dev) { return std_dev > 0.0 ? std_dev * gauss(rng) : 0.0; };

    TrajectoryLog log;
    log.scenario = scenario;
    log.truth.reserve(scenario.T + 1);
    log.frames.reserve(scenario.T);
    log.truth.push_back(scenario.initial_state);

    const int L = static_cast<int>(scenario.landmarks.size());
    EgoState state = scenario.initial_state;
    for (int k = 0; k < scenario.T; ++k) {
        MeasurementFrame frame;
        frame.k = k;
        frame.u = scenario.controls(k);

        Eigen::Vector3d xi_s;
        xi_s << draw(scenario.noise.std_ego_meas(0)), draw(scenario.noise.std_ego_meas(1)),
            draw(scenario.noise.std_ego_meas(2));
        frame.y_s = ego_measurement(state, xi_s);

        frame.a.resize(L);
        for (int l = 0; l < L; ++l) {
            const bool visible = visibility(state, scenario.landmarks[l], scenario.sensor);
            frame.a[l] = visible ? 1 : 0;
            if (visible) {
                Eigen::Vector2d xi_e;
                xi_e << draw(scenario.noise.std_lm_meas(0)), draw(scenario.noise.std_lm_meas(1));
                frame.y_e.emplace_back(
                    l, landmark_measurement(state, scenario.landmarks[l], xi_e, scenario.sensor));
            }
        }

        ProcessNoise v{draw(scenario.noise.std_process(0)), draw(scenario.noise.std_process(1)),
                       draw(scenario.noise.std_process(2))};
        state = dynamics_step(state, frame.u, v);

        log.frames.push_back(std::move(frame));
        log.truth.push_back(state);
    }
    return log;
}

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v)
{
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        arr.push_back(v(i));
    }
    return arr;
}

Eigen::VectorXd vec_from_json(const json& arr, int expected)
{
    if (!arr.is_array() || static_cast<int>(arr.size()) != expected) {
        throw ConfigError("expected a numeric array of length " + std::to_string(expected));
    }
    Eigen::VectorXd v(expected);
    for (int i = 0; i < expected; ++i) {
        v(i) = arr[i].get<double>();
    }
    return v;
}

std::string sensor_kind_name(SensorKind kind)
{
    return kind == SensorKind::BearingOnly ? "bearing" : "range";
}

SensorKind sensor_kind_from_name(const std::string& name)
{
    if (name == "bearing") {
        return SensorKind::BearingOnly;
    }
    if (name == "range") {
        return SensorKind::Range;
    }
    throw ConfigError("unknown sensor kind: " + name);
}

}  // namespace

std::string scenario_to_json(const Scenario& scenario)
{
    json j;
    j["name"] = scenario.name;
    j["T"] = scenario.T;
    j["seed"] = scenario.seed;

    json lms = json::array();
    for (const auto& lm : scenario.landmarks) {
        lms.push_back({lm.px, lm.py});
    }
    j["landmarks"] = lms;

    if (scenario.controls.is_constant()) {
        const ControlInput u = scenario.controls(0);
        j["controls"] = {{"type", "constant"}, {"u", {u.v_lin, u.v_ang}}};
    } else {
        json seq = json::array();
        for (const auto& u : scenario.controls.inputs()) {
            seq.push_back({u.v_lin, u.v_ang});
        }
        j["controls"] = {{"type", "sequence"}, {"u", seq}};
    }

    j["sensor"] = {{"kind", sensor_kind_name(scenario.sensor.kind)},
                   {"r_min", scenario.sensor.r_min},
                   {"r_max", scenario.sensor.r_max}};
    j["noise"] = {{"std_process", vec_to_json(scenario.noise.std_process)},
                  {"std_ego_meas", vec_to_json(scenario.noise.std_ego_meas)},
                  {"std_lm_meas", vec_to_json(scenario.noise.std_lm_meas)}};
    j["initial_state"] = {scenario.initial_state.px, scenario.initial_state.py,
                          scenario.initial_state.theta};
    return j.dump(2);
}

Scenario scenario_from_json(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid scenario JSON: ") + e.what());
    }

    try {
        Scenario scenario;
        scenario.name = j.value("name", std::string("custom"));
        scenario.T = j.at("T").get<int>();
        scenario.seed = j.at("seed").get<std::uint64_t>();

        for (const auto& lm : j.at("landmarks")) {
            scenario.landmarks.push_back({lm.at(0).get<double>(), lm.at(1).get<double>()});
        }

        const auto& controls = j.at("controls");
        const std::string type = controls.at("type").get<std::string>();
        if (type == "constant") {
            const auto& u = controls.at("u");
            scenario.controls =
                ControlSchedule::constant({u.at(0).get<double>(), u.at(1).get<double>()});
        } else if (type == "sequence") {
            std::vector<ControlInput> seq;
            for (const auto& u : controls.at("u")) {
                seq.push_back({u.at(0).get<double>(), u.at(1).get<double>()});
            }
            scenario.controls = ControlSchedule::sequence(std::move(seq));
        } else {
            throw ConfigError("unknown control schedule type: " + type);
        }

        const auto& sensor = j.at("sensor");
        scenario.sensor.kind = sensor_kind_from_name(sensor.at("kind").get<std::string>());
        scenario.sensor.r_min = sensor.value("r_min", 1e-3);
        scenario.sensor.r_max = sensor.at("r_max").get<double>();

        const auto& noise = j.at("noise");
        scenario.noise.std_process = vec_from_json(noise.at("std_process"), 3);
        scenario.noise.std_ego_meas = vec_from_json(noise.at("std_ego_meas"), 3);
        scenario.noise.std_lm_meas = vec_from_json(noise.at("std_lm_meas"), 2);

        if (j.contains("initial_state")) {
            const auto& x0 = j["initial_state"];
            scenario.initial_state = {x0.at(0).get<double>(), x0.at(1).get<double>(),
                                      x0.at(2).get<double>()};
        }

        if (scenario.T < 1 || scenario.landmarks.empty() ||
            scenario.sensor.r_min <= 0.0 || scenario.sensor.r_max <= scenario.sensor.r_min) {
            throw ConfigError("scenario fails validation");
        }
        return scenario;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid scenario JSON: ") + e.what());
    }
}

void export_trajectory_csv(const TrajectoryLog& log, std::ostream& out)
{
    out << "k,truth_px,truth_py,truth_theta,ys_x,ys_y,ys_theta,visibility,measurements\n";
    for (const auto& frame : log.frames) {
        const EgoState& x = log.truth[frame.k];
        out << frame.k << ',' << csv_double(x.px) << ',' << csv_double(x.py) << ','
            << csv_double(x.theta) << ',' << csv_double(frame.y_s(0)) << ','
            << csv_double(frame.y_s(1)) << ',' << csv_double(frame.y_s(2)) << ',';
        for (const auto bit : frame.a) {
            out << (bit ? '1' : '0');
        }
        for (const auto& [id, y] : frame.y_e) {
            out << ',' << id << ',' << csv_double(y(0)) << ',' << csv_double(y(1));
        }
        out << '\n';
    }
}

}  // namespace mheslam
