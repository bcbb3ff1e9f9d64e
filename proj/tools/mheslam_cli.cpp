#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mheslam/acceptance.hpp"
#include "mheslam/errors.hpp"
#include "mheslam/harness.hpp"

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw mheslam::IoError("cannot open " + path);
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct CommonArgs {
    std::string scenario;
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    int workers = 0;
};

mheslam::ExperimentConfig make_config(const CommonArgs& args)
{
    mheslam::ExperimentConfig cfg;
    if (!args.config_path.empty()) {
        cfg = mheslam::experiment_config_from_json(read_file(args.config_path));
    }
    if (!args.scenario.empty()) {
        cfg.scenario = args.scenario;
    }
    if (args.seed_set) {
        cfg.seed = args.seed;
    }
    if (!args.out_dir.empty()) {
        cfg.out_dir = args.out_dir;
    }
    if (args.workers > 0) {
        cfg.workers = args.workers;
    }
    return cfg;
}

void print_summary(const mheslam::ExperimentResult& result)
{
    std::cout << "method: " << mheslam::method_name(result.method) << '\n'
              << "  mean ego error:      " << result.mean_ego_error << '\n'
              << "  final ego error:     " << result.final_ego_error << '\n'
              << "  mean avg lm error:   " << result.mean_lm_error << '\n'
              << "  final avg lm error:  " << result.final_lm_error << '\n'
              << "  mean step time [ms]: " << result.mean_step_ms << '\n';
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Decoupled moving-horizon SLAM estimation experiments"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string method = "decoupled";
    std::vector<std::string> methods;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", args.scenario,
                        "Scenario preset (circular, corridor) or scenario JSON path");
        cmd->add_option("--seed", args.seed, "Simulation seed")
            ->each([&](const std::string&) { args.seed_set = true; });
        cmd->add_option("--out", args.out_dir, "Output directory");
        cmd->add_option("--workers", args.workers, "Landmark update worker threads");
        cmd->add_option("--config", args.config_path, "Experiment config JSON path");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "Run one estimation pipeline");
    add_common(run_cmd);
    run_cmd->add_option("--method", method, "Estimator: decoupled, coupled, or rls");

    CLI::App* compare_cmd =
        app.add_subcommand("compare", "Run several methods on identical data");
    add_common(compare_cmd);
    compare_cmd->add_option("--method", methods, "Methods to compare (repeatable)");

    CLI::App* accept_cmd = app.add_subcommand("accept", "Run the acceptance suite");
    add_common(accept_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            mheslam::ExperimentConfig cfg = make_config(args);
            if (run_cmd->count("--method") > 0) {
                cfg.method = mheslam::method_from_name(method);
            }
            print_summary(mheslam::run_experiment(cfg));
            if (!cfg.out_dir.empty()) {
                std::cout << "outputs written to " << cfg.out_dir << '\n';
            }
        } else if (compare_cmd->parsed()) {
            if (methods.empty()) {
                methods = {"decoupled", "coupled"};
            }
            std::vector<mheslam::ExperimentConfig> cfgs;
            for (const auto& name : methods) {
                mheslam::ExperimentConfig cfg = make_config(args);
                cfg.method = mheslam::method_from_name(name);
                cfgs.push_back(std::move(cfg));
            }
            const mheslam::ComparisonReport report = mheslam::run_comparison(cfgs);
            for (std::size_t i = 0; i < report.summaries.size(); ++i) {
                const auto& s = report.summaries[i];
                std::cout << mheslam::method_name(s.method)
                          << ": mean ego error " << s.mean_ego_error << ", mean step "
                          << s.mean_step_ms << " ms, error ratio "
                          << report.ego_error_ratio[i] << ", timing ratio "
                          << report.timing_ratio[i] << '\n';
            }
        } else if (accept_cmd->parsed()) {
            return mheslam::acceptance::run_and_report(std::cout) ? 0 : 1;
        }
    } catch (const mheslam::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const mheslam::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
