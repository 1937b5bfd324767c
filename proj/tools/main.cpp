// Command-line front end: loads a scenario config, runs the simulation with
// both contact estimators and writes trace.csv / pf_ticks.csv / summary.txt.

#include <CLI11.hpp>

#include <contact2d/harness.hpp>

#include <iostream>

using namespace contact2d;

int main(int argc, char** argv) {
    CLI::App app{"planar-arm contact estimation harness"};
    app.require_subcommand(1);

    CLI::App* run_cmd = app.add_subcommand("run", "run a scenario and write CSV logs");
    std::string config_path, out_dir = "out";
    std::string method, scenario;
    long seed = -1;
    double duration = -1.0;
    bool wallclock = false;
    run_cmd->add_option("--config", config_path, "scenario config file")->required();
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_option("--seed", seed, "override the config seed");
    run_cmd->add_option("--method", method, "analytic | pf | both")
        ->check(CLI::IsMember({"analytic", "pf", "both"}));
    run_cmd->add_option("--scenario", scenario, "hold | track")
        ->check(CLI::IsMember({"hold", "track"}));
    run_cmd->add_option("--duration", duration, "simulated seconds");
    run_cmd->add_flag("--wallclock", wallclock,
                      "demo mode: sim and estimator on separate threads (log not deterministic)");

    CLI11_PARSE(app, argc, argv);

    try {
        ScenarioConfig cfg = load_scenario_config(config_path);
        if (seed >= 0) cfg.seed = static_cast<uint64_t>(seed);
        if (!method.empty())
            cfg.method = method == "analytic" ? RunMethod::analytic
                         : method == "pf"     ? RunMethod::pf
                                              : RunMethod::both;
        if (!scenario.empty())
            cfg.scenario = scenario == "hold" ? ScenarioKind::hold : ScenarioKind::track;
        if (duration > 0.0) cfg.duration = duration;
        cfg.validate();

        if (wallclock) {
            run_wallclock(cfg, out_dir);
            std::cout << "wall-clock demo finished; estimator ticks in " << out_dir
                      << "/pf_ticks_wallclock.csv\n";
            return 0;
        }
        const RunResult result = run(cfg, out_dir);
        std::cout << result.summary.format() << result.bench.format();
        std::cout << "trace: " << result.trace_path.string() << "\n";
        std::cout << "pf ticks: " << result.pf_path.string() << "\n";
        std::cout << "summary: " << result.summary_path.string() << "\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << "\n";
        return 1;
    }
}
