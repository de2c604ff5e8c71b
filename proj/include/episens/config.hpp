#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "episens/calibrate.hpp"
#include "episens/date.hpp"
#include "episens/keyvalue.hpp"
#include "episens/scenario.hpp"
#include "episens/uq.hpp"

namespace episens {

struct DateWindow {
    Date start;
    Date end;  ///< inclusive
};

enum class RegimeSource { config, fit };
enum class GsaMode { full, given_data, finite_change };

/// Every knob of a run, read from a key-value document. Absent keys take the defaults below.
struct RunConfig {
    std::filesystem::path data_path;
    double n_pop = kDefaultPopulation;
    DateWindow pre_window{Date(2020, 2, 24), Date(2020, 3, 8)};
    DateWindow post_window{Date(2020, 3, 9), Date(2020, 4, 20)};
    Date issuance{2020, 3, 9};
    Date horizon{2020, 4, 20};
    std::uint64_t seed = 2020;
    int threads = 1;
    IntegratorOptions integrator{};

    // Regimes used by forecast, delay-sweep, uq and gsa; also the fit guesses.
    SeirParams pre;
    SeirParams post;
    RegimeSource regimes = RegimeSource::config;
    std::optional<double> i0;  ///< I(0) on the pre window start; first confirmed when absent
    double exposed_ratio = 1.0;

    InfectiousSeed fit_seed = InfectiousSeed::first_confirmed;
    std::optional<double> fit_pre_i0;
    std::optional<double> fit_post_i0;
    FitBounds bounds = FitBounds::defaults();
    FitOptions fit{};

    int forecast_delay = 0;
    std::vector<int> sweep_delays{0, 1, 2, 3, 4, 5, 6, 7};
    EvalWindow sweep_window{};

    std::size_t uq_n = 10'000;
    std::optional<double> uq_i0;  ///< centre of the I0 factor; defaults to the scenario I(0)
    RelativeWidths uq_widths{};
    std::vector<double> uq_probabilities{0.025, 0.05, 0.25, 0.5, 0.75, 0.95, 0.975};
    std::size_t uq_bins = 100;
    double uq_max_failure_rate = 0.001;

    GsaMode gsa_mode = GsaMode::full;
    std::optional<std::filesystem::path> gsa_sample;  ///< given-data input; generated when absent
    std::size_t gsa_n = 100'000;
    std::size_t gsa_bins = 50;
    std::size_t gsa_replicates = 20'000;
    std::string gsa_output_column = "total_confirmed";

    KeyValueDoc source;  ///< document the config was read from

    /// Throws InputError on malformed values or unordered dates. Relative paths resolve
    /// against `base_dir`.
    static RunConfig from_doc(const KeyValueDoc& doc, const std::filesystem::path& base_dir = {});
    static RunConfig load(const std::filesystem::path& path);

    /// Stable hash of the source document (FNV-1a over its sorted dump), 16 hex digits.
    std::string hash() const;

    /// Two-regime scenario on the pre window start with the given regimes and the
    /// data-derived initial state.
    TwoRegimeConfig scenario(const ObservedSeries& obs, const SeirParams& pre_params,
                             const SeirParams& post_params) const;

    /// I(0) of the scenario: `i0` or the total confirmed on the pre window start.
    double scenario_i0(const ObservedSeries& obs) const;

    InputDistributionSpec uq_spec(const ObservedSeries& obs, const SeirParams& post_params) const;
};

/// FNV-1a 64-bit.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace episens
