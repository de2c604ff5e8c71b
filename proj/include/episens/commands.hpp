#pragma once

#include <utility>
#include <vector>

#include "episens/calibrate.hpp"
#include "episens/config.hpp"
#include "episens/data.hpp"
#include "episens/gsa.hpp"
#include "episens/report.hpp"
#include "episens/scenario.hpp"
#include "episens/uq.hpp"

namespace episens {

struct RegimeFits {
    FitResult pre;
    FitResult post;
};

ObservedSeries load_observations(const RunConfig& cfg);

/// Fits the pre and post windows independently.
RegimeFits fit_regimes(const RunConfig& cfg, const ObservedSeries& obs);

/// Pre/post parameters for the scenario commands: from the config or fitted on the fly.
std::pair<SeirParams, SeirParams> scenario_regimes(const RunConfig& cfg, const ObservedSeries& obs);

/// Each command writes its files into `out` and returns what it computed.
RegimeFits cmd_fit(const RunConfig& cfg, OutputDir& out);
Trajectory cmd_forecast(const RunConfig& cfg, OutputDir& out);
std::vector<DelaySweepRow> cmd_delay_sweep(const RunConfig& cfg, OutputDir& out);
EmpiricalStats cmd_uq(const RunConfig& cfg, OutputDir& out);
SensitivityReport cmd_gsa(const RunConfig& cfg, OutputDir& out);

}  // namespace episens
