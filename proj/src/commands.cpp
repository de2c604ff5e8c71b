#include "episens/commands.hpp"

#include <cmath>

#include "episens/error.hpp"

namespace episens {

using nlohmann::json;

ObservedSeries load_observations(const RunConfig& cfg) {
    return parse_series_csv(read_text_file(cfg.data_path.string()));
}

namespace {

FitResult fit_window(const RunConfig& cfg, const ObservedSeries& obs, const DateWindow& window,
                     const SeirParams& guess_params, const std::optional<double>& i0_guess) {
    const ObservedSeries slice = slice_window(obs, window.start, window.end);
    FitGuess guess{guess_params, i0_guess.value_or(static_cast<double>(slice.total_confirmed.front()))};
    guess.params.n_pop = cfg.n_pop;
    FitOptions options = cfg.fit;
    options.seed = cfg.seed;
    options.threads = cfg.threads;
    options.integrator = cfg.integrator;
    return fit(slice, guess, cfg.bounds, InitPolicy{cfg.fit_seed, cfg.exposed_ratio}, options);
}

Trajectory fitted_trajectory(const RunConfig& cfg, const FitResult& f, const DateWindow& window) {
    return integrate(f.params, f.init, day_grid(window.end - window.start), cfg.integrator);
}

}  // namespace

RegimeFits fit_regimes(const RunConfig& cfg, const ObservedSeries& obs) {
    return {fit_window(cfg, obs, cfg.pre_window, cfg.pre, cfg.fit_pre_i0),
            fit_window(cfg, obs, cfg.post_window, cfg.post, cfg.fit_post_i0)};
}

std::pair<SeirParams, SeirParams> scenario_regimes(const RunConfig& cfg, const ObservedSeries& obs) {
    if (cfg.regimes == RegimeSource::fit) {
        const RegimeFits fits = fit_regimes(cfg, obs);
        return {fits.pre.params, fits.post.params};
    }
    return {cfg.pre, cfg.post};
}

RegimeFits cmd_fit(const RunConfig& cfg, OutputDir& out) {
    const ObservedSeries obs = load_observations(cfg);
    const RegimeFits fits = fit_regimes(cfg, obs);
    out.write("fit_pre.params", fit_params_file(fits.pre));
    out.write("fit_post.params", fit_params_file(fits.post));
    const ObservedSeries pre_obs = slice_window(obs, cfg.pre_window.start, cfg.pre_window.end);
    const ObservedSeries post_obs = slice_window(obs, cfg.post_window.start, cfg.post_window.end);
    out.write("fit_pre_trajectory.csv",
              trajectory_csv(fitted_trajectory(cfg, fits.pre, cfg.pre_window), cfg.pre_window.start, &pre_obs));
    out.write("fit_post_trajectory.csv",
              trajectory_csv(fitted_trajectory(cfg, fits.post, cfg.post_window), cfg.post_window.start, &post_obs));
    out.write_json("fit_diagnostics.json",
                   json{{"pre", fit_json(fits.pre, cfg.pre_window)}, {"post", fit_json(fits.post, cfg.post_window)}});
    return fits;
}

Trajectory cmd_forecast(const RunConfig& cfg, OutputDir& out) {
    const ObservedSeries obs = load_observations(cfg);
    const auto [pre, post] = scenario_regimes(cfg, obs);
    TwoRegimeConfig scenario = cfg.scenario(obs, pre, post);
    scenario.delay_days = cfg.forecast_delay;
    const Trajectory traj = simulate_two_regime(scenario, cfg.integrator);

    json summary{{"window_start", scenario.window_start.iso()},
                 {"issuance", scenario.issuance_day.iso()},
                 {"delay_days", scenario.delay_days},
                 {"switch_day", scenario.switch_day().iso()},
                 {"horizon", scenario.horizon_end.iso()},
                 {"i0", scenario.init.i},
                 {"pre", params_json(pre)},
                 {"post", params_json(post)},
                 {"total_confirmed_at_horizon", traj.states.back().confirmed()}};
    const Date last = std::min(obs.last_date(), scenario.horizon_end);
    if (!(last < scenario.window_start)) {
        const ObservedSeries ref = slice_window(obs, scenario.window_start, last);
        const auto observed = as_doubles(ref.total_confirmed);
        const auto model = total_confirmed(traj);
        const std::span<const double> head(model.data(), observed.size());
        summary["rmse_total"] = rmse(head, observed);
        if (observed.size() >= 2) summary["r2_total"] = r_squared(head, observed);
    }
    out.write("forecast.csv", trajectory_csv(traj, scenario.window_start, &obs));
    out.write_json("forecast.json", summary);
    return traj;
}

std::vector<DelaySweepRow> cmd_delay_sweep(const RunConfig& cfg, OutputDir& out) {
    const ObservedSeries obs = load_observations(cfg);
    const auto [pre, post] = scenario_regimes(cfg, obs);
    const TwoRegimeConfig scenario = cfg.scenario(obs, pre, post);
    std::vector<Trajectory> trajectories;
    const auto rows =
        delay_sweep(scenario, cfg.sweep_delays, obs, cfg.sweep_window, cfg.integrator, cfg.threads, &trajectories);
    out.write("delay_sweep.csv", sweep_csv(rows));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.write("trajectory_delay_" + std::to_string(rows[k].delay_days) + ".csv",
                  trajectory_csv(trajectories[k], scenario.window_start, &obs));
    }
    return rows;
}

EmpiricalStats cmd_uq(const RunConfig& cfg, OutputDir& out) {
    const ObservedSeries obs = load_observations(cfg);
    const auto [pre, post] = scenario_regimes(cfg, obs);
    const TwoRegimeConfig scenario = cfg.scenario(obs, pre, post);
    const InputDistributionSpec spec = cfg.uq_spec(obs, post);

    const InputSample inputs = sample_inputs(spec, cfg.uq_n, cfg.seed, cfg.threads);
    EnsembleOptions options{cfg.threads, cfg.integrator, cfg.uq_max_failure_rate};
    const OutputSample outputs = evaluate_ensemble(inputs, scenario, scenario.horizon_end, options);
    const EmpiricalStats stats = empirical_stats(outputs.valid_values(), cfg.uq_probabilities, cfg.uq_bins);

    const json spec_meta{{"spec", spec_json(spec)}, {"rows", cfg.uq_n}, {"horizon", scenario.horizon_end.iso()}};
    out.write("uq_sample.csv", write_sample_csv(inputs, outputs), spec_meta);
    json doc = stats_json(stats, outputs.failures());
    doc["spec"] = spec_json(spec);
    doc["horizon"] = scenario.horizon_end.iso();
    out.write_json("uq_stats.json", doc);
    out.write("uq_histogram.csv", histogram_csv(stats.histogram));
    return stats;
}

SensitivityReport cmd_gsa(const RunConfig& cfg, OutputDir& out) {
    const bool given = cfg.gsa_mode != GsaMode::finite_change;
    const bool finite = cfg.gsa_mode != GsaMode::given_data;

    SensitivityReport report;
    report.factor_names.assign(kFactorNames.begin(), kFactorNames.end());

    // Model access is only needed when a sample must be generated or finite changes are wanted.
    const bool needs_model = finite || !cfg.gsa_sample;
    std::optional<TwoRegimeConfig> scenario;
    std::optional<InputDistributionSpec> spec;
    if (needs_model) {
        const ObservedSeries obs = load_observations(cfg);
        const auto [pre, post] = scenario_regimes(cfg, obs);
        scenario = cfg.scenario(obs, pre, post);
        spec = cfg.uq_spec(obs, post);
    }

    if (given) {
        SampleTable table;
        if (cfg.gsa_sample) {
            table = read_sample_table(read_text_file(cfg.gsa_sample->string()), cfg.gsa_output_column);
        } else {
            const InputSample inputs = sample_inputs(*spec, cfg.gsa_n, cfg.seed, cfg.threads);
            EnsembleOptions options{cfg.threads, cfg.integrator, cfg.uq_max_failure_rate};
            const OutputSample outputs = evaluate_ensemble(inputs, *scenario, scenario->horizon_end, options);
            const std::string csv = write_sample_csv(inputs, outputs);
            out.write("gsa_sample.csv", csv, json{{"spec", spec_json(*spec)}, {"rows", cfg.gsa_n}});
            table = read_sample_table(csv, "total_confirmed");
        }
        report = given_data_report(table.factor_names, table.factors, table.output, cfg.gsa_bins, cfg.threads);
    }

    if (finite) {
        const TwoRegimeConfig base = *scenario;
        const IntegratorOptions integrator = cfg.integrator;
        const BlackBox g = [base, integrator](std::span<const double> x) {
            return horizon_output(base, x, integrator);
        };
        const FiniteChangeEnsemble ens =
            replicated_factorial(g, spec_pair_sampler(*spec), cfg.gsa_replicates, cfg.seed, cfg.threads);
        add_finite_changes(report, ens);
        out.write("gsa_spectrum.csv", spectrum_csv(report));
    }

    for (const auto& curve : report.curves) {
        out.write("gsa_curve_" + report.factor_names[curve.factor] + ".csv", curve_csv(curve));
    }
    json doc = sensitivity_json(report);
    doc["mode"] = cfg.gsa_mode == GsaMode::full ? "full"
                  : cfg.gsa_mode == GsaMode::given_data ? "given-data"
                                                        : "finite-change";
    out.write_json("gsa_report.json", doc);
    return report;
}

}  // namespace episens
