#include "mheslam/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "mheslam/angles.hpp"
#include "mheslam/harness.hpp"
#include "mheslam/models.hpp"
#include "mheslam/rls_range.hpp"

namespace mheslam::acceptance {

namespace {

using Clock = std::chrono::steady_clock;

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void require(bool condition, const std::string& message)
    {
        if (!condition) {
            ok = false;
            if (detail.tellp() > 0) {
                detail << "; ";
            }
            detail << message;
        }
    }

    void note(const std::string& message)
    {
        if (detail.tellp() > 0) {
            detail << "; ";
        }
        detail << message;
    }
};

std::string fmt(double v)
{
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

double mean_over(const std::vector<double>& v, int begin, int end)
{
    begin = std::max(begin, 0);
    end = std::min(end, static_cast<int>(v.size()));
    double sum = 0.0;
    for (int i = begin; i < end; ++i) {
        sum += v[i];
    }
    return end > begin ? sum / (end - begin) : 0.0;
}

double landmark_error(const ExperimentResult& result, int step_index, int landmark)
{
    return (result.estimates.landmarks[step_index][landmark].vec() -
            result.log.scenario.landmarks[landmark].vec())
        .norm();
}

// ---------------------------------------------------------------------------
// 1. Zero-noise exactness on the circular preset with all anchors at truth.

CriterionResult criterion_zero_noise_exactness()
{
    Check check;

    ExperimentConfig cfg;
    cfg.scenario = "circular";
    cfg.method = Method::Decoupled;
    cfg.noise_std = 0.0;
    cfg.initial_landmarks_at_truth = true;
    cfg.seed = 7;

    const auto start = Clock::now();
    const ExperimentResult result = run_experiment(cfg);
    const double elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();

    double max_ego = 0.0;
    for (const double e : result.trace.ego_error) {
        max_ego = std::max(max_ego, e);
    }
    check.require(max_ego <= 1e-9, "max ego error " + fmt(max_ego) + " > 1e-9");

    const int T = result.log.scenario.T;
    const int L = static_cast<int>(result.log.scenario.landmarks.size());
    const int M = cfg.landmark.M;
    int never_gated = 0;
    double worst_lm = 0.0;
    for (int l = 0; l < L; ++l) {
        int first_gate = -1;
        for (int k = 0; k < T; ++k) {
            if (result.gated[k][l]) {
                first_gate = k + 1;
                break;
            }
        }
        if (first_gate < 0) {
            ++never_gated;
            continue;
        }
        for (int k = first_gate + 2 * M; k <= T; ++k) {
            worst_lm = std::max(worst_lm, landmark_error(result, k - 1, l));
        }
    }
    check.require(never_gated == 0,
                  std::to_string(never_gated) + " landmarks never became gateable");
    check.require(worst_lm <= 1e-6,
                  "landmark error " + fmt(worst_lm) + " > 1e-6 after 2 informative horizons");
    check.require(elapsed_s < 30.0, "runtime " + fmt(elapsed_s) + " s >= 30 s");
    check.note("max ego err " + fmt(max_ego) + ", worst settled lm err " + fmt(worst_lm) +
               ", runtime " + fmt(elapsed_s) + " s");

    return {1, "zero-noise exactness (circular preset)", check.ok, check.detail.str()};
}

// ---------------------------------------------------------------------------
// 2. Empirical RGES of the ego estimator under an initial anchor offset.

CriterionResult criterion_ego_rges()
{
    Check check;

    ExperimentConfig cfg;
    cfg.scenario = "circular";
    cfg.method = Method::Decoupled;
    cfg.noise_std = 0.0;
    cfg.initial_landmarks_at_truth = true;
    cfg.initial_ego_offset << 0.5, 0.5, 0.2;
    cfg.T = 60;
    cfg.seed = 7;

    const ExperimentResult result = run_experiment(cfg);
    const std::vector<double>& err = result.trace.ego_error;

    const double floor = 1e-10;
    const DecayFit fit = fit_decay_rate(err, 0, 50, floor);
    check.require(fit.lambda < 0.95, "fitted lambda " + fmt(fit.lambda) + " >= 0.95");

    bool monotone = true;
    for (int k = 0; k + 1 < 50; ++k) {
        if (err[k] > floor && err[k + 1] > floor && err[k + 1] > err[k]) {
            monotone = false;
            break;
        }
    }
    check.require(monotone, "log-error not monotone decreasing above the numerical floor");
    check.note("lambda " + fmt(fit.lambda) + " from " + std::to_string(fit.points_used) +
               " points");

    return {2, "empirical RGES decay of the ego estimator", check.ok, check.detail.str()};
}

// ---------------------------------------------------------------------------
// 3. Landmark error decay per informative horizon (bearing-only).

CriterionResult criterion_landmark_decay()
{
    Check check;

    // Robot circles at radius 1 around the landmark; one window sweeps the
    // full circle, landmark always visible.
    const SensorModel sensor{SensorKind::BearingOnly, 1e-3, 2.0};
    const LandmarkState lm_truth{0.0, 0.0};
    const ControlInput u{2.0 * std::sin(0.15), 0.3};

    LandmarkMheConfig cfg;
    cfg.solver.max_iterations = 100;

    LandmarkTrack track;
    track.id = 0;
    track.estimate = LandmarkState{3.0, 4.0};  // 5 m off

    const double initial_error = (track.estimate.vec() - lm_truth.vec()).norm();
    std::vector<double> errors_after_update{initial_error};

    EgoState pose{1.0, 0.0, std::numbers::pi / 2.0 + 0.15};
    for (int k = 0; k < 110; ++k) {
        TrackObservation obs;
        obs.step = k;
        obs.ego = pose;
        obs.visible = visibility(pose, lm_truth, sensor);
        check.require(obs.visible, "landmark left the sensor range");
        obs.y = landmark_measurement(pose, lm_truth, sensor);
        append_observation(track, std::move(obs), cfg.M);

        if (gate(track, cfg)) {
            landmark_update(track, cfg, sensor);
            errors_after_update.push_back((track.estimate.vec() - lm_truth.vec()).norm());
        }
        pose = dynamics_step(pose, u, ProcessNoise{});
    }

    check.require(errors_after_update.size() >= 6,
                  "expected at least 5 updates, got " +
                      std::to_string(errors_after_update.size() - 1));
    for (std::size_t j = 1; j < errors_after_update.size(); ++j) {
        check.require(errors_after_update[j] <= errors_after_update[j - 1],
                      "error increased at update " + std::to_string(j));
    }
    if (errors_after_update.size() >= 6) {
        const double after5 = errors_after_update[5];
        check.require(after5 <= 1e-3 * initial_error,
                      "error after 5 updates " + fmt(after5) + " > 1e-3 * initial");
        check.note("error after 5 updates " + fmt(after5) + " (initial " + fmt(initial_error) +
                   ")");
    }

    return {3, "landmark error decay per informative horizon", check.ok, check.detail.str()};
}

// ---------------------------------------------------------------------------
// 4. Hold invariant over a full corridor run.

CriterionResult criterion_hold_invariant()
{
    Check check;

    ExperimentConfig cfg;
    cfg.scenario = "corridor";
    cfg.method = Method::Decoupled;
    cfg.seed = 11;

    const ExperimentResult result = run_experiment(cfg);
    const int T = result.log.scenario.T;
    const int L = static_cast<int>(result.log.scenario.landmarks.size());

    int violations = 0;
    for (int k = 0; k < T; ++k) {
        for (int l = 0; l < L; ++l) {
            if (result.gated[k][l]) {
                continue;
            }
            const LandmarkState& now = result.estimates.landmarks[k][l];
            const LandmarkState prev =
                k > 0 ? result.estimates.landmarks[k - 1][l] : LandmarkState{0.0, 0.0};
            if (now.px != prev.px || now.py != prev.py) {
                ++violations;
            }
        }
    }
    check.require(violations == 0,
                  std::to_string(violations) + " held estimates changed without a gate pass");
    check.note("checked " + std::to_string(T * L) + " step/landmark pairs");

    return {4, "hold invariant (no update without gate pass)", check.ok, check.detail.str()};
}

// ---------------------------------------------------------------------------
// 5. RLS equals batch weighted least squares.

CriterionResult criterion_rls_batch_equivalence()
{
    Check check;
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> pos(-5.0, 5.0);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_int_distribution<int> length(20, 200);
    std::normal_distribution<double> noise(0.0, 0.05);

    const SensorModel sensor{SensorKind::Range, 1e-3, 1e9};

    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = length(rng);
        const LandmarkState lm{pos(rng), pos(rng)};
        const Eigen::Matrix2d w = [&] {
            Eigen::Matrix2d b;
            b << pos(rng), pos(rng), pos(rng), pos(rng);
            return (b.transpose() * b + 0.3 * Eigen::Matrix2d::Identity()).eval();
        }();

        RlsState state;
        std::vector<Eigen::Matrix2d> phis;
        std::vector<Eigen::Vector2d> targets;
        for (int i = 0; i < n; ++i) {
            EgoState pose{pos(rng), pos(rng), angle(rng)};
            if ((lm.vec() - pose.position()).norm() < 1e-2) {
                pose.px += 1.0;
            }
            Eigen::Vector2d y = landmark_measurement(pose, lm, sensor);
            y += Eigen::Vector2d(noise(rng), noise(rng));
            state = rls_update(std::move(state), pose, y, true, w);

            phis.push_back(rotation(-pose.theta));
            targets.push_back(y + phis.back() * pose.position());
        }

        // Batch oracle: weighted QR on the stacked regression.
        const Eigen::Matrix2d chol_w = Eigen::LLT<Eigen::Matrix2d>(w).matrixU();
        Eigen::MatrixXd a(2 * n, 2);
        Eigen::VectorXd z(2 * n);
        for (int i = 0; i < n; ++i) {
            a.middleRows<2>(2 * i) = chol_w * phis[i];
            z.segment<2>(2 * i) = chol_w * targets[i];
        }
        const Eigen::Vector2d batch = a.colPivHouseholderQr().solve(z);

        worst = std::max(worst, (state.estimate().vec() - batch).norm());
    }
    check.require(worst <= 1e-8, "worst recursive-vs-batch gap " + fmt(worst) + " > 1e-8");
    check.note("worst gap " + fmt(worst) + " over 100 sequences");

    return {5, "RLS matches batch weighted least squares", check.ok, check.detail.str()};
}

// ---------------------------------------------------------------------------
// 6. Noise robustness: errors scale at most ~linearly with noise level.

CriterionResult criterion_noise_scaling()
{
    Check check;

    auto run_at = [](double std_dev) {
        ExperimentConfig cfg;
        cfg.scenario = "corridor";
        cfg.method = Method::Decoupled;
        cfg.T = 1000;
        cfg.noise_std = std_dev;
        cfg.seed = 5;
        return run_experiment(cfg);
    };

    const ExperimentResult low = run_at(0.01);
    const ExperimentResult high = run_at(0.1);

    auto steady = [](const std::vector<double>& v) { return mean_over(v, 200, 1000); };
    const double ego_ratio = steady(high.trace.ego_error) / steady(low.trace.ego_error);
    const double lm_ratio = steady(high.trace.avg_lm_error) / steady(low.trace.avg_lm_error);
    check.require(ego_ratio <= 30.0, "ego error ratio " + fmt(ego_ratio) + " > 30");
    check.require(lm_ratio <= 30.0, "landmark error ratio " + fmt(lm_ratio) + " > 30");

    auto non_divergent = [&](const ExperimentResult& r, const std::string& tag) {
        for (const double e : r.trace.ego_error) {
            check.require(std::isfinite(e), tag + ": non-finite ego error");
        }
        const double early_ego = mean_over(r.trace.ego_error, 200, 600);
        const double late_ego = mean_over(r.trace.ego_error, 600, 1000);
        check.require(late_ego <= 3.0 * early_ego + 1e-12, tag + ": ego error trend grows");
        const double early_lm = mean_over(r.trace.avg_lm_error, 200, 600);
        const double late_lm = mean_over(r.trace.avg_lm_error, 600, 1000);
        check.require(late_lm <= 3.0 * early_lm + 1e-12, tag + ": landmark error trend grows");
    };
    non_divergent(low, "std 0.01");
    non_divergent(high, "std 0.1");
    check.note("ego ratio " + fmt(ego_ratio) + ", lm ratio " + fmt(lm_ratio));

    return {6, "noise robustness scaling (std 0.01 vs 0.1)", check.ok, check.detail.str()};
}

// ---------------------------------------------------------------------------
// 7. Decoupled beats coupled on ego error in the corridor.

CriterionResult criterion_decoupled_vs_coupled()
{
    Check check;

    int wins = 0;
    std::ostringstream seeds_detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ExperimentConfig base;
        base.scenario = "corridor";
        base.T = 200;
        base.seed = seed;

        ExperimentConfig decoupled = base;
        decoupled.method = Method::Decoupled;
        ExperimentConfig coupled = base;
        coupled.method = Method::Coupled;

        const ExperimentResult d = run_experiment(decoupled);
        const ExperimentResult c = run_experiment(coupled);
        if (d.mean_ego_error <= c.mean_ego_error) {
            ++wins;
        }
        seeds_detail << (seed > 1 ? ", " : "") << "seed " << seed << ": "
                     << fmt(d.mean_ego_error) << " vs " << fmt(c.mean_ego_error);
    }
    check.require(wins >= 4, "decoupled won only " + std::to_string(wins) + "/5 seeds");
    check.note("wins " + std::to_string(wins) + "/5 (" + seeds_detail.str() + ")");

    return {7, "decoupled vs coupled ego accuracy (corridor, 5 seeds)", check.ok,
            check.detail.str()};
}

// ---------------------------------------------------------------------------
// 8. Timing separation between decoupled and coupled updates.

CriterionResult criterion_timing_separation()
{
    Check check;

    ExperimentConfig base;
    base.scenario = "corridor";
    base.T = 60;
    base.seed = 3;

    ExperimentConfig decoupled = base;
    decoupled.method = Method::Decoupled;
    ExperimentConfig coupled = base;
    coupled.method = Method::Coupled;

    const ExperimentResult d = run_experiment(decoupled);
    const ExperimentResult c = run_experiment(coupled);

    const double ratio = d.mean_step_ms / c.mean_step_ms;
    check.require(ratio <= 0.1, "per-step time ratio " + fmt(ratio) + " > 0.1");
    check.note("decoupled " + fmt(d.mean_step_ms) + " ms/step, coupled " + fmt(c.mean_step_ms) +
               " ms/step, ratio " + fmt(ratio));

    return {8, "timing separation decoupled vs coupled (L=50, M=20)", check.ok,
            check.detail.str()};
}

// ---------------------------------------------------------------------------
// 9. Solver matches dense normal-equation and grid-search oracles.

CriterionResult criterion_solver_oracles()
{
    Check check;
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    SolveOptions tight;
    tight.max_iterations = 100;
    tight.gradient_tol = 1e-13;
    tight.step_tol = 1e-15;

    // 15 random linear problems against the normal equations.
    double worst_linear = 0.0;
    for (int trial = 0; trial < 15; ++trial) {
        const int dim = 5;
        NlsProblem problem(dim);
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
        for (int blk = 0; blk < 3; ++blk) {
            Eigen::MatrixXd a(dim, dim);
            Eigen::VectorXd c(dim);
            for (int i = 0; i < dim; ++i) {
                c(i) = 3.0 * unit(rng);
                for (int j = 0; j < dim; ++j) {
                    a(i, j) = unit(rng) + (i == j ? 1.5 : 0.0);
                }
            }
            Eigen::MatrixXd w_root(dim, dim);
            for (int i = 0; i < dim; ++i) {
                for (int j = 0; j < dim; ++j) {
                    w_root(i, j) = unit(rng);
                }
            }
            const Eigen::MatrixXd w =
                w_root.transpose() * w_root + 0.5 * Eigen::MatrixXd::Identity(dim, dim);
            const double discount = 0.3 + 2.0 * (unit(rng) + 1.0);

            problem.add_block(
                {dim, w, discount,
                 [a, c](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
                     r = a * x - c;
                     if (jac) {
                         *jac = a;
                     }
                 }});
            h += discount * a.transpose() * w * a;
            b += discount * a.transpose() * w * c;
        }
        const Eigen::VectorXd oracle = h.ldlt().solve(b);

        Eigen::VectorXd x0(dim);
        for (int i = 0; i < dim; ++i) {
            x0(i) = 2.0 * unit(rng);
        }
        const SolveReport report = solve(problem, x0, tight);
        worst_linear = std::max(worst_linear, (report.solution - oracle).norm());
    }
    check.require(worst_linear <= 1e-8,
                  "worst linear-oracle gap " + fmt(worst_linear) + " > 1e-8");

    // 5 scalar-perturbed one-step ego windows against a dense grid search.
    double worst_grid = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const double delta = 0.04 * unit(rng);

        EgoMheConfig cfg;
        EgoWindow window;
        window.anchor = EgoState{0.0, 0.0, 0.0};
        window.data.emplace_back(ControlInput{0.0, 0.0}, Eigen::Vector3d(delta, 0.0, 0.0));

        EgoUpdateResult result = ego_update(window, cfg);
        const double solver_x0 = result.report.solution(0);
        const double solver_v = result.report.solution(3);

        // The px channel decouples: cost(x, v) =
        // 2 eta U (x - 0)^2 + 2 Q v^2 + R (delta - x)^2.
        const double prior_w = 2.0 * cfg.eta * cfg.U_bar(0, 0);
        const double q_w = 2.0 * cfg.Q(0, 0);
        const double r_w = cfg.R(0, 0);
        double best_cost = std::numeric_limits<double>::infinity();
        double best_x = 0.0, best_v = 0.0;
        for (int ix = -100; ix <= 100; ++ix) {
            const double x = 1e-3 * ix;
            for (int iv = -100; iv <= 100; ++iv) {
                const double v = 1e-3 * iv;
                const double cost =
                    prior_w * x * x + q_w * v * v + r_w * (delta - x) * (delta - x);
                if (cost < best_cost) {
                    best_cost = cost;
                    best_x = x;
                    best_v = v;
                }
            }
        }
        worst_grid = std::max(worst_grid, std::abs(solver_x0 - best_x));
        worst_grid = std::max(worst_grid, std::abs(solver_v - best_v));
    }
    check.require(worst_grid <= 2e-3, "worst grid-oracle gap " + fmt(worst_grid) + " > 2e-3");
    check.note("linear gap " + fmt(worst_linear) + ", grid gap " + fmt(worst_grid));

    return {9, "solver vs normal-equation and grid-search oracles", check.ok,
            check.detail.str()};
}

// ---------------------------------------------------------------------------
// 10. Analytic Jacobians match central finite differences.

CriterionResult criterion_jacobians()
{
    Check check;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> pos(-3.0, 3.0);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> dist(0.5, 3.0);

    const double h = 1e-6;
    const double tol = 1e-6;
    double worst = 0.0;

    for (int trial = 0; trial < 100; ++trial) {
        const EgoState x{pos(rng), pos(rng), angle(rng)};
        const ControlInput u{pos(rng) / 3.0, angle(rng) / 3.0};
        const double ray = angle(rng);
        const LandmarkState lm{x.px + dist(rng) * std::cos(ray),
                               x.py + dist(rng) * std::sin(ray)};

        // Dynamics w.r.t. state; heading row compared with wrapped differences.
        {
            const Eigen::Matrix3d analytic = dynamics_jacobian_state(x, u);
            for (int col = 0; col < 3; ++col) {
                Eigen::Vector3d xp = x.vec(), xm = x.vec();
                xp(col) += h;
                xm(col) -= h;
                const EgoState fp = dynamics_step(EgoState::from_vec(xp), u, {});
                const EgoState fm = dynamics_step(EgoState::from_vec(xm), u, {});
                Eigen::Vector3d fd;
                fd << (fp.px - fm.px) / (2 * h), (fp.py - fm.py) / (2 * h),
                    angle_diff(fp.theta, fm.theta) / (2 * h);
                worst = std::max(worst, (fd - analytic.col(col)).cwiseAbs().maxCoeff());
            }
        }
        // Dynamics w.r.t. noise.
        {
            const Eigen::Matrix3d analytic = dynamics_jacobian_noise();
            for (int col = 0; col < 3; ++col) {
                Eigen::Vector3d vp = Eigen::Vector3d::Zero(), vm = Eigen::Vector3d::Zero();
                vp(col) += h;
                vm(col) -= h;
                const EgoState fp = dynamics_step(x, u, ProcessNoise::from_vec(vp));
                const EgoState fm = dynamics_step(x, u, ProcessNoise::from_vec(vm));
                Eigen::Vector3d fd;
                fd << (fp.px - fm.px) / (2 * h), (fp.py - fm.py) / (2 * h),
                    angle_diff(fp.theta, fm.theta) / (2 * h);
                worst = std::max(worst, (fd - analytic.col(col)).cwiseAbs().maxCoeff());
            }
        }
        // Landmark measurement, both sensor kinds, w.r.t. ego and landmark.
        for (const SensorKind kind : {SensorKind::Range, SensorKind::BearingOnly}) {
            const SensorModel model{kind, 1e-3, 1e9};
            const Eigen::Matrix<double, 2, 3> j_ego =
                landmark_measurement_jacobian_ego(x, lm, model);
            for (int col = 0; col < 3; ++col) {
                Eigen::Vector3d xp = x.vec(), xm = x.vec();
                xp(col) += h;
                xm(col) -= h;
                const Eigen::Vector2d fd =
                    (landmark_measurement(EgoState::from_vec(xp), lm, model) -
                     landmark_measurement(EgoState::from_vec(xm), lm, model)) /
                    (2 * h);
                worst = std::max(worst, (fd - j_ego.col(col)).cwiseAbs().maxCoeff());
            }
            const Eigen::Matrix2d j_lm = landmark_measurement_jacobian_landmark(x, lm, model);
            for (int col = 0; col < 2; ++col) {
                Eigen::Vector2d lp = lm.vec(), lmv = lm.vec();
                lp(col) += h;
                lmv(col) -= h;
                const Eigen::Vector2d fd =
                    (landmark_measurement(x, LandmarkState::from_vec(lp), model) -
                     landmark_measurement(x, LandmarkState::from_vec(lmv), model)) /
                    (2 * h);
                worst = std::max(worst, (fd - j_lm.col(col)).cwiseAbs().maxCoeff());
            }
        }
    }
    check.require(worst <= tol, "worst Jacobian gap " + fmt(worst) + " > 1e-6");
    check.note("worst finite-difference gap " + fmt(worst));

    return {10, "analytic Jacobians vs central finite differences", check.ok,
            check.detail.str()};
}

// ---------------------------------------------------------------------------
// 11. Parallel determinism: 1 vs 8 landmark workers.

CriterionResult criterion_parallel_determinism()
{
    Check check;
    namespace fs = std::filesystem;

    const fs::path base = fs::temp_directory_path() / "mheslam_accept_workers";
    fs::remove_all(base);

    auto run_with = [&](int workers) {
        ExperimentConfig cfg;
        cfg.scenario = "corridor";
        cfg.method = Method::Decoupled;
        cfg.T = 200;
        cfg.seed = 13;
        cfg.workers = workers;
        cfg.out_dir = (base / ("w" + std::to_string(workers))).string();
        return run_experiment(cfg);
    };

    const ExperimentResult one = run_with(1);
    const ExperimentResult eight = run_with(8);

    bool identical = one.estimates.ego.size() == eight.estimates.ego.size();
    for (std::size_t k = 0; identical && k < one.estimates.ego.size(); ++k) {
        identical = one.estimates.ego[k].px == eight.estimates.ego[k].px &&
                    one.estimates.ego[k].py == eight.estimates.ego[k].py &&
                    one.estimates.ego[k].theta == eight.estimates.ego[k].theta;
        for (std::size_t l = 0; identical && l < one.estimates.landmarks[k].size(); ++l) {
            identical = one.estimates.landmarks[k][l].px == eight.estimates.landmarks[k][l].px &&
                        one.estimates.landmarks[k][l].py == eight.estimates.landmarks[k][l].py;
        }
    }
    check.require(identical, "in-memory estimates differ between 1 and 8 workers");

    auto file_bytes = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };
    for (const std::string name : {"ego_trace.csv", "lm_trace.csv"}) {
        const std::string a = file_bytes(base / "w1" / name);
        const std::string b = file_bytes(base / "w8" / name);
        check.require(!a.empty() && a == b, name + " differs between 1 and 8 workers");
    }
    fs::remove_all(base);

    return {11, "parallel determinism (1 vs 8 landmark workers)", check.ok, check.detail.str()};
}

}  // namespace

std::vector<CriterionResult> run_all(std::ostream& out)
{
    const std::vector<std::function<CriterionResult()>> criteria = {
        criterion_zero_noise_exactness, criterion_ego_rges,
        criterion_landmark_decay,       criterion_hold_invariant,
        criterion_rls_batch_equivalence, criterion_noise_scaling,
        criterion_decoupled_vs_coupled, criterion_timing_separation,
        criterion_solver_oracles,       criterion_jacobians,
        criterion_parallel_determinism,
    };

    std::vector<CriterionResult> results;
    results.reserve(criteria.size());
    for (const auto& criterion : criteria) {
        CriterionResult result;
        try {
            result = criterion();
        } catch (const std::exception& e) {
            result.id = static_cast<int>(results.size()) + 1;
            result.name = "criterion threw";
            result.passed = false;
            result.detail = e.what();
        }
        out << (result.passed ? "[PASS] " : "[FAIL] ") << "criterion " << result.id << ": "
            << result.name;
        if (!result.detail.empty()) {
            out << " (" << result.detail << ")";
        }
        out << '\n' << std::flush;
        results.push_back(std::move(result));
    }
    return results;
}

bool run_and_report(std::ostream& out)
{
    const auto results = run_all(out);
    int passed = 0;
    for (const auto& r : results) {
        passed += r.passed ? 1 : 0;
    }
    out << passed << "/" << results.size() << " acceptance criteria passed\n";
    return passed == static_cast<int>(results.size());
}

}  // namespace mheslam::acceptance
