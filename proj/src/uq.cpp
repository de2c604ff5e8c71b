#include "episens/uq.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "episens/error.hpp"
#include "episens/keyvalue.hpp"
#include "episens/rng.hpp"

namespace episens {

Marginal Marginal::discrete_relative(double center, double rel) {
    return discrete(std::ceil(center * (1.0 - rel)), std::floor(center * (1.0 + rel)));
}

bool Marginal::contains(double v) const {
    if (v < lower || v > upper) return false;
    return kind == Kind::continuous_uniform || v == std::floor(v);
}

InputDistributionSpec InputDistributionSpec::around(const SeirParams& post, double i0, const RelativeWidths& w) {
    InputDistributionSpec spec;
    spec.marginals[index(Factor::alpha)] = Marginal::relative(post.alpha, w.alpha);
    spec.marginals[index(Factor::beta)] = Marginal::relative(post.beta, w.beta);
    spec.marginals[index(Factor::gamma_inv)] = Marginal::relative(post.gamma_inv, w.gamma_inv);
    spec.marginals[index(Factor::delta)] = Marginal::relative(post.delta, w.delta);
    spec.marginals[index(Factor::i0)] = Marginal::discrete_relative(i0, w.i0);
    spec.marginals[index(Factor::intervention_delay)] = Marginal::discrete(0, w.max_delay);
    return spec;
}

void InputDistributionSpec::validate() const {
    for (std::size_t f = 0; f < kFactorCount; ++f) {
        const Marginal& m = marginals[f];
        bool empty = !(m.lower <= m.upper);
        if (m.kind == Marginal::Kind::discrete_uniform) empty = empty || std::ceil(m.lower) > std::floor(m.upper);
        if (empty) throw EmptySupport(std::string("empty support for factor ") + kFactorNames[f]);
        if (m.lower < 0) throw EmptySupport(std::string("negative support for factor ") + kFactorNames[f]);
    }
}

std::vector<double> InputSample::column(Factor f) const {
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, f);
    return out;
}

double draw_marginal(const Marginal& m, const CounterRng& rng, std::uint64_t row, std::uint64_t factor) {
    if (m.kind == Marginal::Kind::discrete_uniform) {
        const auto lo = static_cast<std::int64_t>(std::ceil(m.lower));
        const auto hi = static_cast<std::int64_t>(std::floor(m.upper));
        return static_cast<double>(rng.integer(factor, row, lo, hi));
    }
    return m.lower + (m.upper - m.lower) * rng.uniform(factor, row);
}

namespace {

InputSample prepare(const InputDistributionSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    if (n == 0) throw EmptySample("sample size must be at least 1");
    InputSample s;
    s.spec = spec;
    s.seed = seed;
    s.rows = n;
    s.values.resize(n * kFactorCount);
    return s;
}

void fill_row(InputSample& s, const CounterRng& rng, std::size_t r) {
    for (std::size_t f = 0; f < kFactorCount; ++f) {
        s.values[r * kFactorCount + f] = draw_marginal(s.spec.marginals[f], rng, r, f);
    }
}

void evaluate_row(const InputSample& samples, const TwoRegimeConfig& base, const EnsembleOptions& options,
                  OutputSample& out, std::size_t r) {
    try {
        out.values[r] = horizon_output(base, samples.row(r), options.integrator);
        if (!std::isfinite(out.values[r]) || out.values[r] < 0) throw NonFiniteState("invalid output");
    } catch (const Error&) {
        out.values[r] = std::numeric_limits<double>::quiet_NaN();
        out.failed[r] = 1;
    }
}

TwoRegimeConfig horizon_config(const TwoRegimeConfig& base, Date horizon_day) {
    if (horizon_day < base.window_start || base.horizon_end < horizon_day) {
        throw OutOfRange("ensemble horizon " + horizon_day.iso() + " outside the base horizon");
    }
    TwoRegimeConfig cfg = base;
    cfg.horizon_end = horizon_day;
    return cfg;
}

void check_failures(const OutputSample& out, const EnsembleOptions& options) {
    const auto failed = out.failures();
    if (static_cast<double>(failed) > options.max_failure_rate * static_cast<double>(out.values.size())) {
        throw FailureRateExceeded(std::to_string(failed) + " of " + std::to_string(out.values.size()) +
                                  " ensemble rows failed");
    }
}

}  // namespace

InputSample sample_inputs(const InputDistributionSpec& spec, std::size_t n, std::uint64_t seed, int threads) {
    InputSample s = prepare(spec, n, seed);
    const CounterRng rng(seed);
    const auto rows = static_cast<long>(n);
#pragma omp parallel for schedule(static) num_threads(std::max(1, threads))
    for (long r = 0; r < rows; ++r) fill_row(s, rng, static_cast<std::size_t>(r));
    return s;
}

InputSample sample_inputs_serial(const InputDistributionSpec& spec, std::size_t n, std::uint64_t seed) {
    InputSample s = prepare(spec, n, seed);
    const CounterRng rng(seed);
    for (std::size_t r = 0; r < n; ++r) fill_row(s, rng, r);
    return s;
}

TwoRegimeConfig apply_factors(const TwoRegimeConfig& base, std::span<const double> x) {
    if (x.size() != kFactorCount) throw InputError("factor vector must have six entries");
    TwoRegimeConfig cfg = base;
    cfg.post.alpha = x[index(Factor::alpha)];
    cfg.post.beta = x[index(Factor::beta)];
    cfg.post.gamma_inv = x[index(Factor::gamma_inv)];
    cfg.post.delta = x[index(Factor::delta)];

    const double i0 = x[index(Factor::i0)];
    const double ratio = base.init.i > 0 ? base.init.e / base.init.i : 1.0;
    SeirState& init = cfg.init;
    const double others = init.p + init.q + init.r + init.d;
    const double population = base.init.total();
    init.i = i0;
    init.e = ratio * i0;
    init.s = population - others - init.i - init.e;

    const double delay = x[index(Factor::intervention_delay)];
    if (delay != std::floor(delay)) throw InputError("intervention delay must be a whole number of days");
    cfg.delay_days = static_cast<int>(delay);
    return cfg;
}

double horizon_output(const TwoRegimeConfig& base, std::span<const double> factors,
                      const IntegratorOptions& integrator) {
    const Trajectory traj = simulate_two_regime(apply_factors(base, factors), integrator);
    return traj.states.back().confirmed();
}

std::size_t OutputSample::failures() const {
    return static_cast<std::size_t>(std::count(failed.begin(), failed.end(), std::uint8_t{1}));
}

std::vector<double> OutputSample::valid_values() const {
    std::vector<double> out;
    out.reserve(values.size());
    for (std::size_t r = 0; r < values.size(); ++r) {
        if (!failed[r]) out.push_back(values[r]);
    }
    return out;
}

OutputSample evaluate_ensemble(const InputSample& samples, const TwoRegimeConfig& base, Date horizon_day,
                               const EnsembleOptions& options) {
    const TwoRegimeConfig cfg = horizon_config(base, horizon_day);
    OutputSample out{std::vector<double>(samples.rows), std::vector<std::uint8_t>(samples.rows, 0)};
    const auto rows = static_cast<long>(samples.rows);
#pragma omp parallel for schedule(dynamic, 64) num_threads(std::max(1, options.threads))
    for (long r = 0; r < rows; ++r) evaluate_row(samples, cfg, options, out, static_cast<std::size_t>(r));
    check_failures(out, options);
    return out;
}

OutputSample evaluate_ensemble_serial(const InputSample& samples, const TwoRegimeConfig& base, Date horizon_day,
                                      const EnsembleOptions& options) {
    const TwoRegimeConfig cfg = horizon_config(base, horizon_day);
    OutputSample out{std::vector<double>(samples.rows), std::vector<std::uint8_t>(samples.rows, 0)};
    for (std::size_t r = 0; r < samples.rows; ++r) evaluate_row(samples, cfg, options, out, r);
    check_failures(out, options);
    return out;
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw EmptySample("quantile of an empty sample");
    if (!(p >= 0 && p <= 1)) throw InputError("quantile probability outside [0, 1]");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

EmpiricalStats empirical_stats(std::span<const double> values, std::span<const double> probabilities,
                               std::size_t bins) {
    if (values.empty()) throw EmptySample("empirical_stats: empty sample");
    if (bins == 0) throw InputError("histogram needs at least one bin");
    EmpiricalStats st;
    st.n = values.size();
    st.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(st.n);
    if (st.n > 1) {
        double ss = 0;
        for (double v : values) ss += (v - st.mean) * (v - st.mean);
        st.sd = std::sqrt(ss / static_cast<double>(st.n - 1));
    }

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    st.probabilities.assign(probabilities.begin(), probabilities.end());
    for (double p : probabilities) st.quantiles.push_back(quantile_sorted(sorted, p));

    st.histogram.lower = sorted.front();
    st.histogram.upper = sorted.back();
    st.degenerate = st.n == 1 || sorted.front() == sorted.back();
    if (st.degenerate) {
        st.histogram.counts.assign(1, st.n);
        return st;
    }
    st.histogram.counts.assign(bins, 0);
    const double width = (st.histogram.upper - st.histogram.lower) / static_cast<double>(bins);
    for (double v : sorted) {
        auto b = static_cast<std::size_t>((v - st.histogram.lower) / width);
        ++st.histogram.counts[std::min(b, bins - 1)];
    }
    return st;
}

std::string write_sample_csv(const InputSample& inputs, const OutputSample& outputs) {
    if (outputs.values.size() != inputs.rows) throw LengthMismatch("inputs and outputs differ in length");
    std::ostringstream out;
    for (const char* name : kFactorNames) out << name << ',';
    out << "total_confirmed,failed\n";
    for (std::size_t r = 0; r < inputs.rows; ++r) {
        for (double v : inputs.row(r)) out << format_double(v) << ',';
        out << (outputs.failed[r] ? std::string("nan") : format_double(outputs.values[r])) << ','
            << static_cast<int>(outputs.failed[r]) << '\n';
    }
    return out.str();
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    while (true) {
        const auto comma = line.find(',');
        out.push_back(line.substr(0, comma));
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
    }
    return out;
}

double parse_cell(std::string_view s, std::size_t line) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw InputError("sample table line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

SampleTable read_sample_table(std::string_view text, const std::string& output_column) {
    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos < text.size();) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) lines.push_back(line);
        pos = end + 1;
    }
    if (lines.empty()) throw MissingColumn("sample table is empty");

    const auto header = split_commas(lines[0]);
    SampleTable table;
    std::vector<std::size_t> factor_cols;
    std::size_t out_col = header.size(), failed_col = header.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == output_column) {
            out_col = c;
        } else if (header[c] == "failed") {
            failed_col = c;
        } else {
            factor_cols.push_back(c);
            table.factor_names.emplace_back(header[c]);
        }
    }
    if (out_col == header.size()) throw MissingColumn("sample table lacks column '" + output_column + "'");
    table.factors.resize(factor_cols.size());

    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto cells = split_commas(lines[k]);
        if (cells.size() != header.size()) {
            throw InputError("sample table line " + std::to_string(k + 1) + ": wrong number of fields");
        }
        if (failed_col < header.size() && cells[failed_col] != "0") continue;
        for (std::size_t f = 0; f < factor_cols.size(); ++f) {
            table.factors[f].push_back(parse_cell(cells[factor_cols[f]], k + 1));
        }
        table.output.push_back(parse_cell(cells[out_col], k + 1));
    }
    return table;
}

}  // namespace episens
