#include "episens/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "episens/error.hpp"
#include "episens/keyvalue.hpp"

#ifndef EPISENS_VERSION
#define EPISENS_VERSION "0.0.0"
#endif

namespace episens {

using nlohmann::json;

std::string tool_version() { return EPISENS_VERSION; }

nlohmann::json metadata_json(const RunMetadata& meta, const std::string& file) {
    return json{{"command", meta.command},
                {"config_hash", meta.config_hash},
                {"file", file},
                {"seed", meta.seed},
                {"tool", "episens"},
                {"tool_version", meta.tool_version}};
}

OutputDir::OutputDir(std::filesystem::path dir, RunMetadata meta) : dir_(std::move(dir)), meta_(std::move(meta)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw InputError("cannot create output directory " + dir_.string() + ": " + ec.message());
}

namespace {

void write_bytes(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw InputError("cannot write " + path.string());
}

std::string num(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

}  // namespace

void OutputDir::write(const std::string& name, const std::string& content, const nlohmann::json& extra) {
    json meta = metadata_json(meta_, name);
    if (extra.is_object()) meta.update(extra);
    write_bytes(dir_ / name, content);
    write_bytes(dir_ / (name + ".meta.json"), meta.dump(2) + "\n");
    written_.push_back(name);
}

void OutputDir::write_json(const std::string& name, const nlohmann::json& doc, const nlohmann::json& extra) {
    write(name, doc.dump(2) + "\n", extra);
}

std::string trajectory_csv(const Trajectory& traj, Date start, const ObservedSeries* obs) {
    std::ostringstream out;
    out << "day,date,S,P,E,I,Q,R,D,total_confirmed,obs_quarantined,obs_recovered,obs_deceased,obs_total\n";
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        const int day = static_cast<int>(std::lround(traj.t[k]));
        const Date date = start + day;
        const SeirState& s = traj.states[k];
        out << day << ',' << date.iso();
        for (double v : s.to_array()) out << ',' << num(v);
        out << ',' << num(s.confirmed());
        if (obs && obs->size() > 0 && !(date < obs->first_date()) && !(obs->last_date() < date)) {
            const std::size_t i = obs->index_of(date);
            out << ',' << obs->quarantined[i] << ',' << obs->recovered[i] << ',' << obs->deceased[i] << ','
                << obs->total_confirmed[i];
        } else {
            out << ",,,,";
        }
        out << '\n';
    }
    return out.str();
}

std::string fit_params_file(const FitResult& fit) {
    KeyValueDoc doc;
    write_params(doc, "", fit.params);
    doc.set("i0", format_double(fit.i0));
    const auto init = fit.init.to_array();
    const char* names[] = {"S", "P", "E", "I", "Q", "R", "D"};
    for (std::size_t k = 0; k < init.size(); ++k) doc.set(std::string("init.") + names[k], format_double(init[k]));
    return doc.dump();
}

nlohmann::json params_json(const SeirParams& p) {
    json j = json::object();
    for (std::size_t k = 0; k < 8; ++k) j[kParamKeys[k]] = param_value(p, k);
    j["n_pop"] = p.n_pop;
    return j;
}

nlohmann::json fit_json(const FitResult& fit, const DateWindow& window) {
    return json{{"window_start", window.start.iso()},
                {"window_end", window.end.iso()},
                {"params", params_json(fit.params)},
                {"i0", fit.i0},
                {"r2", {{"quarantined", fit.r2_by_series[0]},
                        {"recovered", fit.r2_by_series[1]},
                        {"deceased", fit.r2_by_series[2]}}},
                {"r2_avg", fit.r2_avg},
                {"r2_total", fit.r2_total},
                {"rmse_total", fit.rmse_total},
                {"objective", fit.objective},
                {"n_evals", fit.n_evals},
                {"converged", fit.converged},
                {"best_start", fit.best_start}};
}

std::string sweep_csv(std::span<const DelaySweepRow> rows) {
    std::ostringstream out;
    out << "delay,r2,rmse\n";
    for (const auto& r : rows) out << r.delay_days << ',' << num(r.r2) << ',' << num(r.rmse) << '\n';
    return out.str();
}

nlohmann::json stats_json(const EmpiricalStats& stats, std::size_t failures) {
    json q = json::array();
    for (std::size_t k = 0; k < stats.probabilities.size(); ++k) {
        q.push_back({{"p", stats.probabilities[k]}, {"value", stats.quantiles[k]}});
    }
    return json{{"n", stats.n},          {"failures", failures},
                {"mean", stats.mean},    {"sd", stats.sd},
                {"degenerate", stats.degenerate},
                {"quantiles", q},
                {"histogram", {{"lower", stats.histogram.lower},
                               {"upper", stats.histogram.upper},
                               {"bins", stats.histogram.counts.size()}}}};
}

nlohmann::json spec_json(const InputDistributionSpec& spec) {
    json out = json::object();
    for (std::size_t f = 0; f < kFactorCount; ++f) {
        const Marginal& m = spec.marginals[f];
        out[kFactorNames[f]] = {
            {"distribution", m.kind == Marginal::Kind::discrete_uniform ? "discrete_uniform" : "uniform"},
            {"lower", m.lower},
            {"upper", m.upper}};
    }
    return out;
}

std::string histogram_csv(const Histogram& hist) {
    std::ostringstream out;
    out << "bin_lower,bin_upper,count\n";
    const auto bins = hist.counts.size();
    const double width = bins ? (hist.upper - hist.lower) / static_cast<double>(bins) : 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        const double lo = hist.lower + width * static_cast<double>(b);
        const double hi = b + 1 == bins ? hist.upper : hist.lower + width * static_cast<double>(b + 1);
        out << num(lo) << ',' << num(hi) << ',' << hist.counts[b] << '\n';
    }
    return out.str();
}

namespace {

std::string subset_label(const SensitivityReport& report, const SpectrumBar& bar) {
    std::string out;
    for (std::size_t i : bar.members) {
        if (!out.empty()) out += '+';
        out += i < report.factor_names.size() ? report.factor_names[i] : std::to_string(i);
    }
    return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

nlohmann::json sensitivity_json(const SensitivityReport& report) {
    json factors = json::array();
    for (std::size_t i = 0; i < report.factor_names.size(); ++i) {
        json f{{"name", report.factor_names[i]}};
        auto put = [&](const char* key, const std::vector<double>& v) {
            f[key] = i < v.size() ? json(v[i]) : json(nullptr);
        };
        auto put_rank = [&](const char* key, const std::vector<int>& v) {
            f[key] = i < v.size() ? json(v[i]) : json(nullptr);
        };
        put("first_order", report.first_order);
        put("total", report.total);
        put("kuiper_beta", report.kuiper);
        put_rank("rank_first_order", report.rank_first_order);
        put_rank("rank_total", report.rank_total);
        put_rank("rank_kuiper_beta", report.rank_kuiper);
        if (i < report.curves.size()) {
            f["curve_direction"] = report.curves[i].direction;
            f["curve_spearman"] = report.curves[i].spearman;
        }
        factors.push_back(std::move(f));
    }

    json newton = json::array();
    const std::size_t d = report.factor_names.size();
    std::size_t p = 0;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d && p < report.newton_ratio_means.size(); ++j, ++p) {
            const double v = report.newton_ratio_means[p];
            newton.push_back({{"pair", {report.factor_names[i], report.factor_names[j]}},
                              {"mean_ratio", std::isfinite(v) ? json(v) : json(nullptr)}});
        }
    }

    json spectrum = json::array();
    for (const auto& bar : report.spectrum) {
        spectrum.push_back({{"subset", subset_label(report, bar)},
                            {"order", bar.members.size()},
                            {"mean_abs_effect", bar.mean_abs_effect}});
    }

    return json{{"factors", factors},
                {"given_data", {{"n", report.given_data_n}, {"bins", report.m_bins}}},
                {"interaction_fraction", optional_number(report.interaction_fraction)},
                {"finite_change", {{"replicates", report.replicates},
                                   {"evaluations", report.evaluations},
                                   {"output_variance", report.output_variance}}},
                {"mean_dimension", optional_number(report.mean_dimension)},
                {"newton_ratios", newton},
                {"interaction_spectrum", spectrum}};
}

std::string spectrum_csv(const SensitivityReport& report) {
    std::ostringstream out;
    out << "order,subset,mean_abs_effect\n";
    for (const auto& bar : report.spectrum) {
        out << bar.members.size() << ',' << subset_label(report, bar) << ',' << num(bar.mean_abs_effect) << '\n';
    }
    return out.str();
}

std::string curve_csv(const ConditionalCurve& curve) {
    std::ostringstream out;
    out << "center,mean,median,population\n";
    for (std::size_t b = 0; b < curve.centers.size(); ++b) {
        out << num(curve.centers[b]) << ',' << num(curve.means[b]) << ',' << num(curve.medians[b]) << ','
            << curve.populations[b] << '\n';
    }
    return out.str();
}

}  // namespace episens
