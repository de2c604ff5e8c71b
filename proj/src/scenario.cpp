#include "episens/scenario.hpp"

#include <algorithm>
#include <exception>

#include "episens/calibrate.hpp"
#include "episens/error.hpp"

namespace episens {

void TwoRegimeConfig::validate() const {
    if (delay_days < 0) throw InputError("intervention delay must be non-negative");
    if (issuance_day < window_start) throw InputError("issuance day precedes the window start");
    if (horizon_end < switch_day()) {
        throw InputError("intervention day " + switch_day().iso() + " falls after the horizon " + horizon_end.iso());
    }
    pre.validate();
    post.validate();
}

Trajectory simulate_two_regime(const TwoRegimeConfig& cfg, const IntegratorOptions& integrator) {
    cfg.validate();
    const int switch_at = cfg.switch_day() - cfg.window_start;
    const int horizon = cfg.horizon_end - cfg.window_start;

    Trajectory out = integrate(cfg.pre, cfg.init, day_grid(switch_at), integrator);
    if (horizon == switch_at) return out;

    const Trajectory tail = integrate(cfg.post, out.states.back(), day_grid(horizon - switch_at), integrator);
    for (std::size_t k = 1; k < tail.t.size(); ++k) {
        out.t.push_back(tail.t[k] + static_cast<double>(switch_at));
        out.states.push_back(tail.states[k]);
    }
    return out;
}

std::vector<DelaySweepRow> delay_sweep(const TwoRegimeConfig& base, std::span<const int> delays,
                                       const ObservedSeries& obs, const EvalWindow& window,
                                       const IntegratorOptions& integrator, int threads,
                                       std::vector<Trajectory>* trajectories) {
    const Date from = window.start.value_or(base.window_start);
    const Date to = window.end.value_or(base.horizon_end);
    if (to < from || from < base.window_start || base.horizon_end < to) {
        throw OutOfRange("evaluation window must lie inside the simulated range");
    }
    const ObservedSeries ref = slice_window(obs, from, to);
    const auto observed = as_doubles(ref.total_confirmed);
    const auto offset = static_cast<std::size_t>(from - base.window_start);

    std::vector<DelaySweepRow> rows(delays.size());
    std::vector<Trajectory> sims(delays.size());
    std::vector<std::exception_ptr> failures(delays.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, threads))
    for (std::size_t k = 0; k < delays.size(); ++k) {
        try {
            TwoRegimeConfig cfg = base;
            cfg.delay_days = delays[k];
            sims[k] = simulate_two_regime(cfg, integrator);
            const auto total = total_confirmed(sims[k]);
            const std::span<const double> model(total.data() + offset, observed.size());
            rows[k] = {delays[k], r_squared(model, observed), rmse(model, observed)};
        } catch (...) {
            failures[k] = std::current_exception();
        }
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
    if (trajectories) *trajectories = std::move(sims);
    return rows;
}

}  // namespace episens
