#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "episens/calibrate.hpp"
#include "episens/config.hpp"
#include "episens/gsa.hpp"
#include "episens/scenario.hpp"
#include "episens/uq.hpp"

namespace episens {

std::string tool_version();

/// Provenance written next to every output file.
struct RunMetadata {
    std::string command;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string tool_version = episens::tool_version();
};

/// Output directory; every file gets a `<name>.meta.json` sidecar.
class OutputDir {
public:
    OutputDir(std::filesystem::path dir, RunMetadata meta);

    /// `extra` fields are merged into the sidecar.
    void write(const std::string& name, const std::string& content, const nlohmann::json& extra = nullptr);
    void write_json(const std::string& name, const nlohmann::json& doc, const nlohmann::json& extra = nullptr);

    const std::filesystem::path& path() const { return dir_; }
    const std::vector<std::string>& written() const { return written_; }

private:
    std::filesystem::path dir_;
    RunMetadata meta_;
    std::vector<std::string> written_;
};

nlohmann::json metadata_json(const RunMetadata& meta, const std::string& file);

/// Daily trajectory with S..D, total confirmed and, where `obs` covers the date, the observed
/// quarantined/recovered/deceased/total columns (empty otherwise).
std::string trajectory_csv(const Trajectory& traj, Date start, const ObservedSeries* obs = nullptr);

/// Fitted parameters, I(0) and the initial state as a key-value parameter file.
std::string fit_params_file(const FitResult& fit);

nlohmann::json params_json(const SeirParams& p);
nlohmann::json fit_json(const FitResult& fit, const DateWindow& window);

/// `delay,r2,rmse`
std::string sweep_csv(std::span<const DelaySweepRow> rows);

nlohmann::json stats_json(const EmpiricalStats& stats, std::size_t failures);

nlohmann::json spec_json(const InputDistributionSpec& spec);

/// `bin_lower,bin_upper,count`
std::string histogram_csv(const Histogram& hist);

nlohmann::json sensitivity_json(const SensitivityReport& report);

/// `order,subset,mean_abs_effect`, subsets written as factor names joined by '+'.
std::string spectrum_csv(const SensitivityReport& report);

/// `center,mean,median,population`
std::string curve_csv(const ConditionalCurve& curve);

}  // namespace episens
