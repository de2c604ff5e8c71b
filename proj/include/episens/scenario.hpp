#pragma once

#include <optional>
#include <span>
#include <vector>

#include "episens/data.hpp"
#include "episens/date.hpp"
#include "episens/seir.hpp"

namespace episens {

/// Pre-intervention dynamics until issuance_day + delay_days, post-intervention after.
/// The rate clocks of lambda(t) and kappa(t) restart at the switch.
struct TwoRegimeConfig {
    SeirParams pre;
    SeirParams post;
    Date window_start;  ///< t = 0; `init` holds here
    Date issuance_day;
    int delay_days = 0;
    Date horizon_end;
    SeirState init;

    Date switch_day() const { return issuance_day + delay_days; }
    /// Throws InputError when dates are out of order or the delay is negative.
    void validate() const;
};

/// Daily trajectory from window_start to horizon_end.
Trajectory simulate_two_regime(const TwoRegimeConfig& cfg, const IntegratorOptions& integrator = {});

struct DelaySweepRow {
    int delay_days = 0;
    double r2 = 0;
    double rmse = 0;
};

/// Optional sub-window for the goodness-of-fit comparison (defaults to the simulated range).
struct EvalWindow {
    std::optional<Date> start;
    std::optional<Date> end;
};

/// One two-regime simulation per delay, scored on total confirmed against obs.
/// Rows follow the input order; `trajectories`, when given, receives each simulation.
std::vector<DelaySweepRow> delay_sweep(const TwoRegimeConfig& base, std::span<const int> delays,
                                       const ObservedSeries& obs, const EvalWindow& window = {},
                                       const IntegratorOptions& integrator = {}, int threads = 1,
                                       std::vector<Trajectory>* trajectories = nullptr);

}  // namespace episens
