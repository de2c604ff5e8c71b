// Acceptance checks on the Italian data set. One PASS/FAIL line per criterion.
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "episens/commands.hpp"
#include "episens/error.hpp"
#include "episens/rng.hpp"

using namespace episens;
namespace fs = std::filesystem;

namespace {

const fs::path kConfig = fs::path(EPISENS_CONFIG_DIR) / "italy.cfg";

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

fs::path workdir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("episens_acceptance_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunConfig italy() { return RunConfig::load(kConfig); }

Outcome fit_quality(bool post, double gate) {
    const RunConfig cfg = italy();
    const ObservedSeries obs = load_observations(cfg);
    const RegimeFits fits = fit_regimes(cfg, obs);
    const FitResult& f = post ? fits.post : fits.pre;
    return {f.r2_avg >= gate, fmt("r2_avg %.4f (Q %.4f R %.4f D %.4f), gate >= %.2f", f.r2_avg, f.r2_by_series[0],
                                 f.r2_by_series[1], f.r2_by_series[2], gate)};
}

Outcome delay_sweep_shape() {
    const RunConfig cfg = italy();
    const ObservedSeries obs = load_observations(cfg);
    const auto [pre, post] = scenario_regimes(cfg, obs);
    const std::vector<int> delays{0, 1, 2, 3, 4, 5};
    const auto rows = delay_sweep(cfg.scenario(obs, pre, post), delays, obs, {}, cfg.integrator);
    std::size_t best = 0;
    std::string table;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k].r2 > rows[best].r2) best = k;
        table += fmt(" %d:%.4f", rows[k].delay_days, rows[k].r2);
    }
    const double gap = rows[5].r2 - rows[0].r2;
    return {best == 5 && gap >= 0.4, fmt("r2 by delay%s; argmax %d, gap %.4f (need argmax 5, gap >= 0.4)",
                                         table.c_str(), rows[best].delay_days, gap)};
}

Outcome uq_moments() {
    const RunConfig cfg = italy();
    OutputDir out(workdir("uq"), RunMetadata{"uq", cfg.seed, cfg.hash()});
    const EmpiricalStats stats = cmd_uq(cfg, out);
    const double actual = 181228;
    const double lo = stats.quantiles[0], hi = stats.quantiles[6];
    const bool mean_ok = std::abs(stats.mean / 1.7769e5 - 1) <= 0.15;
    const bool sd_ok = std::abs(stats.sd / 9.0035e4 - 1) <= 0.25;
    const bool bracket = lo <= actual && actual <= hi;
    return {stats.n == 10000 && mean_ok && sd_ok && bracket,
            fmt("n %zu, mean %.0f (%.1f%%), sd %.0f (%.1f%%), 95%% band [%.0f, %.0f] vs %.0f", stats.n, stats.mean,
                100 * (stats.mean / 1.7769e5 - 1), stats.sd, 100 * (stats.sd / 9.0035e4 - 1), lo, hi, actual)};
}

// Full sensitivity run shared by the ranking, mean-dimension and interaction criteria.
SensitivityReport full_gsa(const std::string& name) {
    RunConfig cfg = italy();
    cfg.gsa_mode = GsaMode::full;
    OutputDir out(workdir(name), RunMetadata{"gsa", cfg.seed, cfg.hash()});
    return cmd_gsa(cfg, out);
}

std::size_t factor_index(const SensitivityReport& rep, Factor f) {
    const auto it = std::find(rep.factor_names.begin(), rep.factor_names.end(), kFactorNames[index(f)]);
    if (it == rep.factor_names.end()) throw InputError(std::string("no factor ") + kFactorNames[index(f)]);
    return static_cast<std::size_t>(it - rep.factor_names.begin());
}

Outcome factor_ranking() {
    const SensitivityReport rep = full_gsa("ranking");
    const std::size_t z = factor_index(rep, Factor::intervention_delay);
    const std::size_t q = factor_index(rep, Factor::delta);
    bool pass = rep.given_data_n >= 100000;
    std::string detail = fmt("n %zu;", rep.given_data_n);
    const std::pair<const char*, const std::vector<double>*> measures[] = {
        {"S", &rep.first_order}, {"T", &rep.total}, {"Ku", &rep.kuiper}};
    for (const auto& [label, v] : measures) {
        const bool first = importance_ranks(*v)[z] == 1;
        const double ratio = (*v)[z] / (*v)[q];
        pass = pass && first && ratio >= 3.5 && ratio <= 8.0;
        detail += fmt(" %s: Z rank %d, Z/delta %.2f;", label, importance_ranks(*v)[z], ratio);
    }
    return {pass, detail + " need rank 1 and ratio in [3.5, 8.0]"};
}

Outcome mean_dimension() {
    const SensitivityReport rep = full_gsa("dimension");
    const double dg = rep.mean_dimension.value_or(NAN);
    const double frac = rep.interaction_fraction.value_or(NAN);
    return {rep.replicates >= 2000 && dg >= 1.05 && dg <= 1.30 && frac < 0.12,
            fmt("replicates %zu, D_g %.4f (need [1.05, 1.30]), interaction fraction %.4f (need < 0.12)",
                rep.replicates, dg, frac)};
}

Outcome largest_pair() {
    const SensitivityReport rep = full_gsa("pairs");
    const SpectrumBar* pair = nullptr;
    const SpectrumBar* single = nullptr;
    for (const auto& bar : rep.spectrum) {
        if (bar.members.size() == 1 && (!single || bar.mean_abs_effect > single->mean_abs_effect)) single = &bar;
        if (bar.members.size() == 2 && (!pair || bar.mean_abs_effect > pair->mean_abs_effect)) pair = &bar;
    }
    const std::size_t z = factor_index(rep, Factor::intervention_delay);
    const std::size_t q = factor_index(rep, Factor::delta);
    const bool is_zq = pair->members == std::vector<std::size_t>{std::min(z, q), std::max(z, q)};
    const double ratio = pair->mean_abs_effect / single->mean_abs_effect;
    return {is_zq && ratio >= 0.10 && ratio <= 0.30,
            fmt("largest pair %s+%s, %.1f%% of largest singleton %s (need delta+intervention_delay, 10-30%%)",
                rep.factor_names[pair->members[0]].c_str(), rep.factor_names[pair->members[1]].c_str(),
                100 * ratio, rep.factor_names[single->members[0]].c_str())};
}

double ishigami(std::span<const double> x) {
    return std::sin(x[0]) + 7.0 * std::pow(std::sin(x[1]), 2) + 0.1 * std::pow(x[2], 4) * std::sin(x[0]);
}

Outcome estimator_oracles() {
    using std::numbers::pi;
    std::string detail;
    bool pass = true;

    const double a = 7, b = 0.1;
    const double v1 = 0.5 * std::pow(1 + b * std::pow(pi, 4) / 5, 2);
    const double v2 = a * a / 8;
    const double v13 = b * b * std::pow(pi, 8) * (1.0 / 18 - 1.0 / 50);
    const double v = v1 + v2 + v13;
    const double analytic[3] = {v1 / v, v2 / v, 0};
    const std::size_t n = 100000;
    const CounterRng rng(8);
    std::vector<std::vector<double>> x(3, std::vector<double>(n));
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        double p[3];
        for (std::size_t f = 0; f < 3; ++f) p[f] = x[f][r] = -pi + 2 * pi * rng.uniform(f, r);
        y[r] = ishigami(p);
    }
    detail += "Ishigami S";
    for (std::size_t f = 0; f < 3; ++f) {
        const double s = first_order_given_data(x[f], y, 50);
        pass = pass && std::abs(s - analytic[f]) <= 0.02;
        detail += fmt(" %.4f/%.4f", s, analytic[f]);
    }

    // Dyadic points keep every vertex value exact, so the interaction terms must vanish exactly.
    const BlackBox additive = [](std::span<const double> p) { return 2 * p[0] - 3 * p[1] + p[2] * p[2]; };
    const FiniteChange add = finite_change_decomposition(additive, Point{0.125, 0.75, -0.375}, Point{0.875, -0.25, 1.5});
    double max_interaction = 0;
    for (Subset s = 1; s < add.effects.size(); ++s) {
        if (std::popcount(s) > 1) max_interaction = std::max(max_interaction, std::abs(add.effects[s]));
    }
    pass = pass && max_interaction == 0;
    detail += fmt("; additive max |interaction| %g", max_interaction);

    const BlackBox product = [](std::span<const double> p) { return p[0] * p[1]; };
    const FiniteChange prod = finite_change_decomposition(product, Point{0.5, 2.0}, Point{1.5, -1.0});
    const double newton = newton_ratio(prod.effect(0b11), 1.0, -3.0);
    pass = pass && newton == 1.0;
    detail += fmt("; x1*x2 Newton ratio %.17g", newton);

    const BlackBox g = [](std::span<const double> p) { return ishigami(p); };
    const PairSampler sampler = [](std::size_t k, std::uint64_t seed) {
        const CounterRng r(seed);
        Point from(3), to(3);
        for (std::size_t f = 0; f < 3; ++f) {
            from[f] = -pi + 2 * pi * r.uniform(f, 2 * k);
            to[f] = -pi + 2 * pi * r.uniform(f, 2 * k + 1);
        }
        return std::pair{from, to};
    };
    const FiniteChangeEnsemble ens = replicated_factorial(g, sampler, 1000, 17);
    double worst = 0;
    for (const auto& rep : ens.replicates) {
        double sum = 0;
        for (double e : rep.effects) sum += e;
        worst = std::max(worst, std::abs(sum - rep.dy()) / std::max(std::abs(rep.dy()), 1e-300));
    }
    pass = pass && worst <= 1e-9;
    detail += fmt("; decomposition identity worst rel err %.2e over %zu", worst, ens.replicates.size());
    return {pass, detail};
}

Outcome delay_ratio() {
    RunConfig cfg = italy();
    cfg.gsa_mode = GsaMode::given_data;
    OutputDir out(workdir("curve"), RunMetadata{"gsa", cfg.seed, cfg.hash()});
    const SensitivityReport rep = cmd_gsa(cfg, out);
    const ConditionalCurve& curve = rep.curves[factor_index(rep, Factor::intervention_delay)];
    double at0 = NAN, at7 = NAN;
    for (std::size_t k = 0; k < curve.centers.size(); ++k) {
        if (curve.centers[k] == 0) at0 = curve.medians[k];
        if (curve.centers[k] == 7) at7 = curve.medians[k];
    }
    const double ratio = at7 / at0;
    return {ratio >= 3.0 && ratio <= 5.0,
            fmt("median at delay 7 %.0f / delay 0 %.0f = %.3f (need [3.0, 5.0])", at7, at0, ratio)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
    return files;
}

Outcome determinism() {
    const fs::path root = workdir("determinism");
    bool pass = true;
    std::string detail;
    for (const char* command : {"fit", "forecast", "delay-sweep", "uq", "gsa"}) {
        std::vector<std::map<std::string, std::string>> runs;
        for (const auto& [tag, threads] : {std::pair{"a", 1}, std::pair{"b", 1}, std::pair{"c", 8}}) {
            const fs::path dir = root / (std::string(command) + "_" + tag);
            const std::string cmd = std::string(EPISENS_CLI) + " " + command + " --config " + kConfig.string() +
                                    " --threads " + std::to_string(threads) + " --out " + dir.string() +
                                    " > /dev/null 2>&1";
            const int status = std::system(cmd.c_str());
            if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
                return {false, fmt("%s exited with status %d", command, status)};
            }
            runs.push_back(snapshot(dir));
        }
        const bool same = !runs[0].empty() && runs[0] == runs[1] && runs[0] == runs[2];
        pass = pass && same;
        detail += fmt("%s%s %zu files %s", detail.empty() ? "" : "; ", command, runs[0].size(),
                      same ? "identical" : "DIFFER");
    }
    return {pass, detail + " (1, 1 and 8 threads)"};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
    static const std::vector<std::pair<std::string, std::function<Outcome()>>> list = {
        {"post-intervention fit quality", [] { return fit_quality(true, 0.99); }},
        {"pre-intervention fit quality", [] { return fit_quality(false, 0.93); }},
        {"delay sweep shape", delay_sweep_shape},
        {"uncertainty moments at n = 10000", uq_moments},
        {"factor ranking", factor_ranking},
        {"mean dimension and interaction fraction", mean_dimension},
        {"largest interaction pair", largest_pair},
        {"estimator oracles", estimator_oracles},
        {"conditional-curve delay ratio", delay_ratio},
        {"determinism across reruns and threads", determinism},
    };
    return list;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    int only = 0;
    app.add_option("--criterion", only, "Run a single criterion (1-10)")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    int failures = 0;
    const auto& list = criteria();
    for (std::size_t k = 0; k < list.size(); ++k) {
        if (only && static_cast<int>(k + 1) != only) continue;
        Outcome o;
        try {
            o = list[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, list[k].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failures += !o.pass;
    }
    fs::remove_all(fs::temp_directory_path() / ("episens_acceptance_" + std::to_string(::getpid())));
    return failures ? 1 : 0;
}
