#include "mheslam/harness.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "mheslam/angles.hpp"
#include "mheslam/csv.hpp"
#include "mheslam/errors.hpp"
#include "mheslam/rls_range.hpp"

namespace mheslam {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double mean(const std::vector<double>& v)
{
    if (v.empty()) {
        return 0.0;
    }
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::string method_name(Method method)
{
    switch (method) {
        case Method::Decoupled: return "decoupled";
        case Method::Coupled: return "coupled";
        case Method::Rls: return "rls";
    }
    return "unknown";
}

Method method_from_name(const std::string& name)
{
    if (name == "decoupled") {
        return Method::Decoupled;
    }
    if (name == "coupled") {
        return Method::Coupled;
    }
    if (name == "rls") {
        return Method::Rls;
    }
    throw ConfigError("unknown method: " + name);
}

Scenario build_scenario_for(const ExperimentConfig& cfg)
{
    Scenario scenario;
    if (cfg.scenario_inline) {
        scenario = *cfg.scenario_inline;
    } else if (cfg.scenario == "circular") {
        CircularScenarioParams params;
        params.noise = NoiseSpec(0.01);
        params.seed = cfg.seed;
        scenario = build_circular_scenario(params);
    } else if (cfg.scenario == "corridor") {
        CorridorScenarioParams params;
        params.noise = NoiseSpec(0.01);
        params.seed = cfg.seed;
        scenario = build_corridor_scenario(params);
    } else {
        std::ifstream in(cfg.scenario);
        if (!in) {
            throw IoError("cannot open scenario file: " + cfg.scenario);
        }
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        scenario = scenario_from_json(text);
    }

    scenario.seed = cfg.seed;
    if (cfg.T) {
        scenario.T = *cfg.T;
    }
    if (cfg.noise_std) {
        scenario.noise = NoiseSpec(*cfg.noise_std);
    }
    if (cfg.sensor_kind) {
        scenario.sensor.kind = *cfg.sensor_kind;
    }
    if (scenario.T < 1 || scenario.landmarks.empty()) {
        throw ConfigError("scenario must have at least one step and one landmark");
    }
    return scenario;
}

namespace {

std::vector<LandmarkState> initial_landmarks_for(const ExperimentConfig& cfg,
                                                 const Scenario& scenario)
{
    const std::size_t L = scenario.landmarks.size();
    if (cfg.initial_landmarks_at_truth) {
        return scenario.landmarks;
    }
    if (cfg.initial_landmarks) {
        if (cfg.initial_landmarks->size() != L) {
            throw ConfigError("initial landmark count does not match scenario");
        }
        return *cfg.initial_landmarks;
    }
    return std::vector<LandmarkState>(L, LandmarkState{0.0, 0.0});
}

EgoState initial_ego_for(const ExperimentConfig& cfg, const Scenario& scenario)
{
    EgoState e = scenario.initial_state;
    e.px += cfg.initial_ego_offset(0);
    e.py += cfg.initial_ego_offset(1);
    e.theta = wrap_angle(e.theta + cfg.initial_ego_offset(2));
    return e;
}

void run_decoupled(const ExperimentConfig& cfg, const TrajectoryLog& log,
                   ExperimentResult& result)
{
    const Scenario& scenario = log.scenario;
    const int L = static_cast<int>(scenario.landmarks.size());

    EgoMheEstimator ego(cfg.ego, initial_ego_for(cfg, scenario));
    const std::vector<LandmarkState> lm0 = initial_landmarks_for(cfg, scenario);
    std::vector<LandmarkTrack> tracks(L);
    for (int l = 0; l < L; ++l) {
        tracks[l].id = l;
        tracks[l].estimate = lm0[l];
    }

    EgoState ego_for_frame = ego.estimate();
    for (const auto& frame : log.frames) {
        const auto t0 = Clock::now();
        const auto& ego_result = ego.step(frame.u, frame.y_s);
        const double ego_ms = ms_since(t0);

        const auto t1 = Clock::now();
        step_all(tracks, frame, ego_for_frame, cfg.landmark, scenario.sensor, cfg.workers);
        const double lm_ms = ms_since(t1);
        ego_for_frame = ego_result.estimate;

        result.estimates.ego.push_back(ego_result.estimate);
        std::vector<LandmarkState> lms(L);
        std::vector<std::uint8_t> gated(L);
        std::vector<int> ms(L);
        for (int l = 0; l < L; ++l) {
            lms[l] = tracks[l].estimate;
            gated[l] = tracks[l].last_gate ? 1 : 0;
            ms[l] = tracks[l].m;
        }
        result.estimates.landmarks.push_back(std::move(lms));
        result.gated.push_back(std::move(gated));
        result.m_history.push_back(std::move(ms));
        result.estimates.times.push_back(
            {ego_ms, L > 0 ? lm_ms / L : 0.0, ms_since(t0)});
    }

    result.final_m.resize(L);
    for (int l = 0; l < L; ++l) {
        result.final_m[l] = tracks[l].m;
    }
}

void run_rls(const ExperimentConfig& cfg, const TrajectoryLog& log, ExperimentResult& result)
{
    const Scenario& scenario = log.scenario;
    const int L = static_cast<int>(scenario.landmarks.size());

    EgoMheEstimator ego(cfg.ego, initial_ego_for(cfg, scenario));
    const std::vector<LandmarkState> lm0 = initial_landmarks_for(cfg, scenario);
    std::vector<RlsState> states(L);

    EgoState ego_for_frame = ego.estimate();
    for (const auto& frame : log.frames) {
        const auto t0 = Clock::now();
        const auto& ego_result = ego.step(frame.u, frame.y_s);
        const double ego_ms = ms_since(t0);

        const auto t1 = Clock::now();
        std::vector<std::uint8_t> gated(L);
        for (int l = 0; l < L; ++l) {
            const bool visible = frame.a[l] != 0;
            gated[l] = visible ? 1 : 0;
            if (visible) {
                states[l] = rls_update(std::move(states[l]), ego_for_frame,
                                       *frame.measurement_of(l), true, cfg.landmark.R);
            }
        }
        const double lm_ms = ms_since(t1);
        ego_for_frame = ego_result.estimate;

        result.estimates.ego.push_back(ego_result.estimate);
        std::vector<LandmarkState> lms(L);
        std::vector<int> ms(L);
        for (int l = 0; l < L; ++l) {
            lms[l] = states[l].has_estimate() ? states[l].estimate() : lm0[l];
            ms[l] = states[l].update_count();
        }
        result.estimates.landmarks.push_back(std::move(lms));
        result.gated.push_back(std::move(gated));
        result.m_history.push_back(std::move(ms));
        result.estimates.times.push_back(
            {ego_ms, L > 0 ? lm_ms / L : 0.0, ms_since(t0)});
    }

    result.final_m.resize(L);
    for (int l = 0; l < L; ++l) {
        result.final_m[l] = states[l].update_count();
    }
}

void run_coupled(const ExperimentConfig& cfg, const TrajectoryLog& log, ExperimentResult& result)
{
    const Scenario& scenario = log.scenario;
    const int L = static_cast<int>(scenario.landmarks.size());

    CoupledMheConfig coupled_cfg;
    coupled_cfg.eta = cfg.ego.eta;
    coupled_cfg.U_bar_ego = cfg.ego.U_bar;
    coupled_cfg.U_bar_lm = cfg.landmark.U_bar;
    coupled_cfg.Q = cfg.ego.Q;
    coupled_cfg.R_ego = cfg.ego.R;
    coupled_cfg.R_lm = cfg.landmark.R;
    coupled_cfg.M = cfg.ego.N;
    coupled_cfg.solver = cfg.ego.solver;

    AugmentedState init{initial_ego_for(cfg, scenario), initial_landmarks_for(cfg, scenario)};
    CoupledMheEstimator estimator(coupled_cfg, scenario.sensor, std::move(init));

    int k = 0;
    for (const auto& frame : log.frames) {
        ++k;
        const auto t0 = Clock::now();
        const auto& step_result = estimator.step(frame);
        const double total_ms = ms_since(t0);

        result.estimates.ego.push_back(step_result.estimate.ego);
        result.estimates.landmarks.push_back(step_result.estimate.landmarks);
        result.gated.emplace_back(L, 1);
        result.m_history.emplace_back(L, k);
        result.estimates.times.push_back({total_ms, 0.0, total_ms});
    }
    result.final_m.assign(L, k);
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result)
{
    namespace fs = std::filesystem;
    const fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory: " + cfg.out_dir);
    }

    auto open = [&](const std::string& name) {
        std::ofstream out(dir / name);
        if (!out) {
            throw IoError("cannot write " + (dir / name).string());
        }
        return out;
    };

    {
        auto out = open("scenario.json");
        out << scenario_to_json(result.log.scenario) << '\n';
    }
    {
        auto out = open("trajectory.csv");
        export_trajectory_csv(result.log, out);
    }
    {
        auto out = open("ego_trace.csv");
        out << "k,est_px,est_py,est_theta,ego_err\n";
        for (std::size_t i = 0; i < result.estimates.ego.size(); ++i) {
            const EgoState& e = result.estimates.ego[i];
            out << (i + 1) << ',' << csv_double(e.px) << ',' << csv_double(e.py) << ','
                << csv_double(e.theta) << ',' << csv_double(result.trace.ego_error[i]) << '\n';
        }
    }
    {
        auto out = open("lm_trace.csv");
        out << "k,id,est_x,est_y,m,gated,method\n";
        const std::string method = method_name(result.method);
        for (std::size_t i = 0; i < result.estimates.landmarks.size(); ++i) {
            for (std::size_t l = 0; l < result.estimates.landmarks[i].size(); ++l) {
                const LandmarkState& lm = result.estimates.landmarks[i][l];
                out << (i + 1) << ',' << l << ',' << csv_double(lm.px) << ','
                    << csv_double(lm.py) << ',' << result.m_history[i][l] << ','
                    << int(result.gated[i][l]) << ',' << method << '\n';
            }
        }
    }
    {
        auto out = open("metrics.csv");
        export_metrics_csv(result.trace, out);
    }
    {
        nlohmann::json j;
        j["method"] = method_name(result.method);
        j["seed"] = cfg.seed;
        j["T"] = result.log.scenario.T;
        j["L"] = result.log.scenario.landmarks.size();
        j["scenario"] = result.log.scenario.name;
        j["mean_ego_error"] = result.mean_ego_error;
        j["final_ego_error"] = result.final_ego_error;
        j["mean_avg_lm_error"] = result.mean_lm_error;
        j["final_avg_lm_error"] = result.final_lm_error;
        j["mean_step_ms"] = result.mean_step_ms;
        j["mean_ego_ms"] = result.mean_ego_ms;
        j["mean_lm_ms"] = result.mean_lm_ms;
        j["final_m"] = result.final_m;
        auto out = open("summary.json");
        out << j.dump(2) << '\n';
    }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    cfg.ego.validate();
    cfg.landmark.validate();

    const Scenario scenario = build_scenario_for(cfg);
    if (cfg.method == Method::Rls && scenario.sensor.kind != SensorKind::Range) {
        throw ConfigError("method 'rls' requires the range sensor model");
    }

    ExperimentResult result;
    result.method = cfg.method;
    result.log = run(scenario);

    switch (cfg.method) {
        case Method::Decoupled: run_decoupled(cfg, result.log, result); break;
        case Method::Rls: run_rls(cfg, result.log, result); break;
        case Method::Coupled: run_coupled(cfg, result.log, result); break;
    }

    result.trace = compute_traces(result.log, result.estimates);
    result.mean_ego_error = mean(result.trace.ego_error);
    result.final_ego_error = result.trace.ego_error.back();
    result.mean_lm_error = mean(result.trace.avg_lm_error);
    result.final_lm_error = result.trace.avg_lm_error.back();

    std::vector<double> step_ms, ego_ms, lm_ms;
    for (const auto& t : result.trace.times) {
        step_ms.push_back(t.total_ms);
        ego_ms.push_back(t.ego_ms);
        lm_ms.push_back(t.lm_mean_ms);
    }
    result.mean_step_ms = mean(step_ms);
    result.mean_ego_ms = mean(ego_ms);
    result.mean_lm_ms = mean(lm_ms);

    if (!cfg.out_dir.empty()) {
        write_outputs(cfg, result);
    }
    return result;
}

ComparisonReport run_comparison(const std::vector<ExperimentConfig>& cfgs)
{
    if (cfgs.empty()) {
        throw ConfigError("comparison needs at least one config");
    }
    for (const auto& cfg : cfgs) {
        if (cfg.scenario != cfgs.front().scenario || cfg.seed != cfgs.front().seed) {
            throw ConfigError("comparison configs must share scenario and seed");
        }
    }

    ComparisonReport report;
    for (const auto& cfg : cfgs) {
        const ExperimentResult result = run_experiment(cfg);
        report.summaries.push_back({result.method, result.mean_ego_error, result.mean_lm_error,
                                    result.mean_step_ms});
    }
    for (const auto& s : report.summaries) {
        const auto& base = report.summaries.front();
        report.ego_error_ratio.push_back(
            base.mean_ego_error > 0.0 ? s.mean_ego_error / base.mean_ego_error : 1.0);
        report.timing_ratio.push_back(
            base.mean_step_ms > 0.0 ? s.mean_step_ms / base.mean_step_ms : 1.0);
    }

    for (const auto& cfg : cfgs) {
        if (!cfg.out_dir.empty()) {
            nlohmann::json j;
            for (std::size_t i = 0; i < report.summaries.size(); ++i) {
                const auto& s = report.summaries[i];
                j["methods"].push_back({{"method", method_name(s.method)},
                                        {"mean_ego_error", s.mean_ego_error},
                                        {"mean_avg_lm_error", s.mean_lm_error},
                                        {"mean_step_ms", s.mean_step_ms},
                                        {"ego_error_ratio", report.ego_error_ratio[i]},
                                        {"timing_ratio", report.timing_ratio[i]}});
            }
            std::filesystem::create_directories(cfg.out_dir);
            std::ofstream out(std::filesystem::path(cfg.out_dir) / "comparison.json");
            if (!out) {
                throw IoError("cannot write comparison.json");
            }
            out << j.dump(2) << '\n';
            break;
        }
    }
    return report;
}

ExperimentConfig experiment_config_from_json(const std::string& json_text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("invalid config JSON: ") + e.what());
    }

    try {
        ExperimentConfig cfg;
        if (j.contains("scenario")) {
            if (j["scenario"].is_string()) {
                cfg.scenario = j["scenario"].get<std::string>();
            } else {
                cfg.scenario_inline = scenario_from_json(j["scenario"].dump());
            }
        }
        if (j.contains("method")) {
            cfg.method = method_from_name(j["method"].get<std::string>());
        }
        if (j.contains("seed")) {
            cfg.seed = j["seed"].get<std::uint64_t>();
        }
        if (j.contains("workers")) {
            cfg.workers = j["workers"].get<int>();
        }
        if (j.contains("out")) {
            cfg.out_dir = j["out"].get<std::string>();
        }
        if (j.contains("T")) {
            cfg.T = j["T"].get<int>();
        }
        if (j.contains("noise_std")) {
            cfg.noise_std = j["noise_std"].get<double>();
        }
        if (j.contains("sensor")) {
            const std::string kind = j["sensor"].get<std::string>();
            if (kind == "bearing") {
                cfg.sensor_kind = SensorKind::BearingOnly;
            } else if (kind == "range") {
                cfg.sensor_kind = SensorKind::Range;
            } else {
                throw ConfigError("unknown sensor kind: " + kind);
            }
        }
        if (j.contains("initial_ego_offset")) {
            const auto& o = j["initial_ego_offset"];
            cfg.initial_ego_offset << o.at(0).get<double>(), o.at(1).get<double>(),
                o.at(2).get<double>();
        }
        if (j.contains("initial_landmarks")) {
            if (j["initial_landmarks"].is_string() &&
                j["initial_landmarks"].get<std::string>() == "truth") {
                cfg.initial_landmarks_at_truth = true;
            } else {
                std::vector<LandmarkState> lms;
                for (const auto& lm : j["initial_landmarks"]) {
                    lms.push_back({lm.at(0).get<double>(), lm.at(1).get<double>()});
                }
                cfg.initial_landmarks = std::move(lms);
            }
        }
        if (j.contains("ego")) {
            const auto& e = j["ego"];
            cfg.ego.eta = e.value("eta", cfg.ego.eta);
            cfg.ego.N = e.value("N", cfg.ego.N);
            if (e.contains("u_bar")) {
                cfg.ego.U_bar = e["u_bar"].get<double>() * Eigen::Matrix3d::Identity();
            }
            if (e.contains("q")) {
                cfg.ego.Q = e["q"].get<double>() * Eigen::Matrix<double, 6, 6>::Identity();
            }
            if (e.contains("r")) {
                cfg.ego.R = e["r"].get<double>() * Eigen::Matrix3d::Identity();
            }
            if (e.contains("u_lower")) {
                cfg.ego.U_lower = e["u_lower"].get<double>() * Eigen::Matrix3d::Identity();
            }
        }
        if (j.contains("landmark")) {
            const auto& l = j["landmark"];
            cfg.landmark.eta = l.value("eta", cfg.landmark.eta);
            cfg.landmark.M = l.value("M", cfg.landmark.M);
            if (l.contains("u_bar")) {
                cfg.landmark.U_bar = l["u_bar"].get<double>() * Eigen::Matrix2d::Identity();
            }
            if (l.contains("q")) {
                cfg.landmark.Q = l["q"].get<double>() * Eigen::Matrix2d::Identity();
            }
            if (l.contains("r")) {
                cfg.landmark.R = l["r"].get<double>() * Eigen::Matrix2d::Identity();
            }
            if (l.contains("gate")) {
                const std::string gate = l["gate"].get<std::string>();
                if (gate == "full") {
                    cfg.landmark.gate_policy.kind = GatePolicy::Kind::FullVisibility;
                } else if (gate == "gramian") {
                    cfg.landmark.gate_policy.kind = GatePolicy::Kind::RangeGramian;
                } else {
                    throw ConfigError("unknown gate policy: " + gate);
                }
            }
            if (l.contains("gate_threshold")) {
                cfg.landmark.gate_policy.min_eig_threshold = l["gate_threshold"].get<double>();
            }
        }
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config JSON: ") + e.what());
    }
}

}  // namespace mheslam
