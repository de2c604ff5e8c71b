#include "episens/config.hpp"

#include <cmath>
#include <cstdio>

#include "episens/data.hpp"
#include "episens/error.hpp"

namespace episens {

namespace {

// Published Italian estimates; the defaults for both the scenario and the fit guesses.
constexpr SeirParams kPreDefault{0.0, 1.1801, 2.182, 0.5985, 0.0437, 0.1161, 0.0162, 0.0461, kDefaultPopulation};
constexpr SeirParams kPostDefault{0.1098, 2.0, 14.2091, 0.3750, 0.0167, 2.0, 0.0240, 0.0432, kDefaultPopulation};

Date get_date(const KeyValueDoc& doc, const std::string& key, Date fallback) {
    const auto v = doc.find(key);
    return v ? Date::parse(*v) : fallback;
}

std::optional<double> get_optional(const KeyValueDoc& doc, const std::string& key, std::string_view absent_word) {
    const auto v = doc.find(key);
    if (!v || *v == absent_word) return std::nullopt;
    return doc.get_double(key);
}

std::size_t get_count(const KeyValueDoc& doc, const std::string& key, std::size_t fallback) {
    const long long v = doc.get_int(key, static_cast<long long>(fallback));
    if (v < 1) throw InputError("key '" + key + "' must be at least 1");
    return static_cast<std::size_t>(v);
}

Interval get_interval(const KeyValueDoc& doc, const std::string& key, Interval fallback) {
    const auto v = doc.get_doubles(key, {fallback.lower, fallback.upper});
    if (v.size() != 2) throw InputError("key '" + key + "' expects 'lower, upper'");
    if (v[0] > v[1]) throw InfeasibleBounds("key '" + key + "': lower bound above upper bound");
    return {v[0], v[1]};
}

template <typename E>
E get_enum(const KeyValueDoc& doc, const std::string& key, E fallback,
           std::initializer_list<std::pair<const char*, E>> names) {
    const auto v = doc.find(key);
    if (!v) return fallback;
    for (const auto& [name, value] : names) {
        if (*v == name) return value;
    }
    throw InputError("key '" + key + "': unknown value '" + *v + "'");
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RunConfig RunConfig::from_doc(const KeyValueDoc& doc, const std::filesystem::path& base_dir) {
    RunConfig c;
    c.source = doc;
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };
    c.data_path = resolve(doc.get_string("data"));
    c.n_pop = doc.get_double("n_pop", c.n_pop);
    c.pre_window = {get_date(doc, "pre.window_start", c.pre_window.start),
                    get_date(doc, "pre.window_end", c.pre_window.end)};
    c.post_window = {get_date(doc, "post.window_start", c.post_window.start),
                     get_date(doc, "post.window_end", c.post_window.end)};
    c.issuance = get_date(doc, "issuance", c.issuance);
    c.horizon = get_date(doc, "horizon", c.horizon);
    const long long seed = doc.get_int("seed", static_cast<long long>(c.seed));
    if (seed < 0) throw InputError("seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);
    c.threads = static_cast<int>(doc.get_int("threads", c.threads));
    c.integrator.max_step = doc.get_double("integrator.max_step", c.integrator.max_step);

    SeirParams pre = kPreDefault;
    SeirParams post = kPostDefault;
    pre.n_pop = post.n_pop = c.n_pop;
    c.pre = read_params(doc, "pre.", pre);
    c.post = read_params(doc, "post.", post);
    c.pre.n_pop = c.post.n_pop = c.n_pop;
    c.regimes = get_enum(doc, "regimes", c.regimes, {{"config", RegimeSource::config}, {"fit", RegimeSource::fit}});
    c.i0 = get_optional(doc, "init.i0", "first-confirmed");
    c.exposed_ratio = doc.get_double("init.exposed_ratio", c.exposed_ratio);

    c.fit_seed = get_enum(doc, "fit.i0_policy", c.fit_seed,
                          {{"first-confirmed", InfectiousSeed::first_confirmed},
                           {"guess", InfectiousSeed::guess},
                           {"fitted", InfectiousSeed::fitted}});
    c.fit_pre_i0 = get_optional(doc, "fit.pre.i0", "first-confirmed");
    c.fit_post_i0 = get_optional(doc, "fit.post.i0", "first-confirmed");
    for (std::size_t k = 0; k < 8; ++k) {
        c.bounds.params[k] = get_interval(doc, std::string("bounds.") + kParamKeys[k], c.bounds.params[k]);
    }
    c.bounds.i0 = get_interval(doc, "bounds.i0", c.bounds.i0);
    c.fit.starts = static_cast<int>(get_count(doc, "fit.starts", static_cast<std::size_t>(c.fit.starts)));
    c.fit.jitter = doc.get_double("fit.jitter", c.fit.jitter);
    c.fit.rel_tol = doc.get_double("fit.rel_tol", c.fit.rel_tol);
    c.fit.max_iterations =
        static_cast<int>(get_count(doc, "fit.max_iterations", static_cast<std::size_t>(c.fit.max_iterations)));
    c.fit.max_restarts = static_cast<int>(doc.get_int("fit.max_restarts", c.fit.max_restarts));

    c.forecast_delay = static_cast<int>(doc.get_int("forecast.delay", c.forecast_delay));
    if (doc.has("sweep.delays")) {
        c.sweep_delays.clear();
        for (double v : doc.get_doubles("sweep.delays", {})) {
            if (v != std::floor(v) || v < 0) throw InputError("sweep.delays must be non-negative integers");
            c.sweep_delays.push_back(static_cast<int>(v));
        }
    }
    if (doc.has("sweep.eval_start")) c.sweep_window.start = Date::parse(doc.get_string("sweep.eval_start"));
    if (doc.has("sweep.eval_end")) c.sweep_window.end = Date::parse(doc.get_string("sweep.eval_end"));

    c.uq_n = get_count(doc, "uq.n", c.uq_n);
    c.uq_i0 = get_optional(doc, "uq.i0", "scenario");
    c.uq_widths.alpha = doc.get_double("uq.rel.alpha", c.uq_widths.alpha);
    c.uq_widths.beta = doc.get_double("uq.rel.beta", c.uq_widths.beta);
    c.uq_widths.gamma_inv = doc.get_double("uq.rel.gamma_inv", c.uq_widths.gamma_inv);
    c.uq_widths.delta = doc.get_double("uq.rel.delta", c.uq_widths.delta);
    c.uq_widths.i0 = doc.get_double("uq.rel.i0", c.uq_widths.i0);
    c.uq_widths.max_delay = static_cast<int>(doc.get_int("uq.max_delay", c.uq_widths.max_delay));
    c.uq_probabilities = doc.get_doubles("uq.probabilities", c.uq_probabilities);
    c.uq_bins = get_count(doc, "uq.bins", c.uq_bins);
    c.uq_max_failure_rate = doc.get_double("uq.max_failure_rate", c.uq_max_failure_rate);

    c.gsa_mode = get_enum(doc, "gsa.mode", c.gsa_mode,
                          {{"full", GsaMode::full},
                           {"given-data", GsaMode::given_data},
                           {"finite-change", GsaMode::finite_change}});
    if (doc.has("gsa.sample")) c.gsa_sample = resolve(doc.get_string("gsa.sample"));
    c.gsa_n = get_count(doc, "gsa.n", c.gsa_n);
    c.gsa_bins = get_count(doc, "gsa.bins", c.gsa_bins);
    c.gsa_replicates = get_count(doc, "gsa.replicates", c.gsa_replicates);
    c.gsa_output_column = doc.get_string("gsa.output_column", c.gsa_output_column);

    if (c.pre_window.end < c.pre_window.start || c.post_window.end < c.post_window.start) {
        throw InputError("window end precedes its start");
    }
    if (c.issuance < c.pre_window.start || c.horizon < c.issuance) {
        throw InputError("dates must satisfy pre.window_start <= issuance <= horizon");
    }
    if (c.n_pop <= 0) throw InputError("n_pop must be positive");
    if (c.threads < 1) throw InputError("threads must be at least 1");
    if (c.forecast_delay < 0) throw InputError("forecast.delay must be non-negative");
    for (double p : c.uq_probabilities) {
        if (!(p >= 0 && p <= 1)) throw InputError("uq.probabilities must lie in [0, 1]");
    }
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    return from_doc(KeyValueDoc::load(path.string()), path.parent_path());
}

std::string RunConfig::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(source.dump())));
    return buf;
}

double RunConfig::scenario_i0(const ObservedSeries& obs) const {
    if (i0) return *i0;
    return static_cast<double>(obs.total_confirmed[obs.index_of(pre_window.start)]);
}

TwoRegimeConfig RunConfig::scenario(const ObservedSeries& obs, const SeirParams& pre_params,
                                    const SeirParams& post_params) const {
    const ObservedSeries from_start = slice_window(obs, pre_window.start, obs.last_date());
    TwoRegimeConfig cfg;
    cfg.pre = pre_params;
    cfg.post = post_params;
    cfg.window_start = pre_window.start;
    cfg.issuance_day = issuance;
    cfg.delay_days = 0;
    cfg.horizon_end = horizon;
    cfg.init = initial_state(from_start, scenario_i0(obs), exposed_ratio, n_pop);
    return cfg;
}

InputDistributionSpec RunConfig::uq_spec(const ObservedSeries& obs, const SeirParams& post_params) const {
    return InputDistributionSpec::around(post_params, uq_i0.value_or(scenario_i0(obs)), uq_widths);
}

}  // namespace episens
