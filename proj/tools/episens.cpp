#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "episens/commands.hpp"
#include "episens/error.hpp"

namespace {

using namespace episens;

int run(const std::string& command, const std::string& config_path, std::optional<std::uint64_t> seed,
        std::optional<int> threads, const std::string& out_dir) {
    RunConfig cfg = RunConfig::load(config_path);
    if (seed) cfg.seed = *seed;
    if (threads) {
        if (*threads < 1) throw InputError("--threads must be at least 1");
        cfg.threads = *threads;
    }
    OutputDir out(out_dir, RunMetadata{command, cfg.seed, cfg.hash()});

    if (command == "fit") {
        const RegimeFits fits = cmd_fit(cfg, out);
        std::printf("pre  r2_avg %.4f  post r2_avg %.4f\n", fits.pre.r2_avg, fits.post.r2_avg);
    } else if (command == "forecast") {
        const Trajectory traj = cmd_forecast(cfg, out);
        std::printf("total confirmed on %s: %.0f\n", cfg.horizon.iso().c_str(), traj.states.back().confirmed());
    } else if (command == "delay-sweep") {
        for (const auto& row : cmd_delay_sweep(cfg, out)) {
            std::printf("delay %d  r2 %.4f  rmse %.1f\n", row.delay_days, row.r2, row.rmse);
        }
    } else if (command == "uq") {
        const EmpiricalStats stats = cmd_uq(cfg, out);
        std::printf("n %zu  mean %.1f  sd %.1f\n", stats.n, stats.mean, stats.sd);
    } else if (command == "gsa") {
        const SensitivityReport report = cmd_gsa(cfg, out);
        for (std::size_t i = 0; i < report.factor_names.size(); ++i) {
            std::printf("%-20s", report.factor_names[i].c_str());
            if (i < report.first_order.size()) std::printf("  S %.4f  Ku %.4f", report.first_order[i], report.kuiper[i]);
            if (i < report.total.size()) std::printf("  T %.4f", report.total[i]);
            std::printf("\n");
        }
        if (report.mean_dimension) std::printf("mean dimension %.4f\n", *report.mean_dimension);
    }
    std::printf("wrote %zu files to %s\n", out.written().size(), out.path().string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-regime SEIR calibration, uncertainty and sensitivity analysis"};
    app.set_version_flag("--version", episens::tool_version());
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string out_dir = "out";

    const std::map<std::string, std::string> commands = {
        {"fit", "Fit the pre- and post-intervention regimes"},
        {"forecast", "Simulate the two-regime scenario to the horizon"},
        {"delay-sweep", "Score the scenario for each intervention delay"},
        {"uq", "Monte Carlo ensemble of the horizon forecast"},
        {"gsa", "Global sensitivity analysis of the horizon forecast"}};
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "Run configuration file")->required();
        sub->add_option("--seed", seed, "Override the configured seed");
        sub->add_option("--threads", threads, "Worker threads");
        sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        return run(app.get_subcommands().front()->get_name(), config_path, seed, threads, out_dir);
    } catch (const episens::Error& e) {
        std::fprintf(stderr, "episens: %s\n", e.what());
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "episens: %s\n", e.what());
        return 1;
    }
}
