#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "episens/calibrate.hpp"
#include "episens/data.hpp"
#include "episens/error.hpp"
#include "episens/uq.hpp"

using namespace episens;

namespace {

const SeirParams kPre{0.0, 1.1801, 2.182, 0.5985, 0.0437, 0.1161, 0.0162, 0.0461, kDefaultPopulation};
const SeirParams kPost{0.1098, 2.0, 14.2091, 0.3750, 0.0167, 2.0, 0.0240, 0.0432, kDefaultPopulation};

TwoRegimeConfig paper_config() {
    const auto obs =
        parse_series_csv(read_text_file(std::string(EPISENS_DATA_DIR) + "/dpc-covid19-ita-andamento-nazionale.csv"));
    TwoRegimeConfig cfg;
    cfg.pre = kPre;
    cfg.post = kPost;
    cfg.window_start = Date(2020, 2, 24);
    cfg.issuance_day = Date(2020, 3, 9);
    cfg.horizon_end = Date(2020, 4, 20);
    cfg.init = initial_state(obs, 229, 1.0, kDefaultPopulation);
    return cfg;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

}  // namespace

TEST_CASE("input distribution") {
    const auto spec = InputDistributionSpec::around(kPost, 229);
    CHECK(spec.marginals[index(Factor::alpha)].lower == doctest::Approx(0.1098 * 0.9));
    CHECK(spec.marginals[index(Factor::alpha)].upper == doctest::Approx(0.1098 * 1.1));
    CHECK(spec.marginals[index(Factor::delta)].lower == doctest::Approx(0.375 * 0.7));
    CHECK(spec.marginals[index(Factor::delta)].upper == doctest::Approx(0.375 * 1.3));
    const auto& i0 = spec.marginals[index(Factor::i0)];
    CHECK(i0.kind == Marginal::Kind::discrete_uniform);
    CHECK(i0.lower == 184);  // ceil(183.2)
    CHECK(i0.upper == 274);  // floor(274.8)
    const auto& z = spec.marginals[index(Factor::intervention_delay)];
    CHECK(z.lower == 0);
    CHECK(z.upper == 7);

    InputDistributionSpec bad = spec;
    bad.marginals[index(Factor::i0)] = Marginal::discrete(3.2, 3.7);
    CHECK_THROWS_AS(bad.validate(), EmptySupport);
    bad = spec;
    bad.marginals[0] = Marginal::uniform(-1, 1);
    CHECK_THROWS_AS(bad.validate(), EmptySupport);
    CHECK_THROWS_AS(sample_inputs(bad, 10, 1), EmptySupport);
}

TEST_CASE("sampling") {
    const auto spec = InputDistributionSpec::around(kPost, 229);

    SUBCASE("collapsed supports give identical rows") {
        InputDistributionSpec point;
        for (std::size_t f = 0; f < kFactorCount; ++f) point.marginals[f] = Marginal::uniform(f + 1.0, f + 1.0);
        point.marginals[index(Factor::intervention_delay)] = Marginal::discrete(3, 3);
        const auto s = sample_inputs(point, 50, 9);
        for (std::size_t r = 0; r < s.rows; ++r) {
            for (std::size_t f = 0; f < kFactorCount; ++f) CHECK(s.row(r)[f] == s.row(0)[f]);
        }
    }
    SUBCASE("delay frequencies") {
        const auto s = sample_inputs(spec, 100000, 2020, 4);
        std::vector<int> counts(8, 0);
        for (double z : s.column(Factor::intervention_delay)) {
            REQUIRE(z == std::floor(z));
            ++counts[static_cast<std::size_t>(z)];
        }
        for (int c : counts) CHECK(std::abs(c / 1e5 - 0.125) <= 0.005);
    }
    SUBCASE("every value inside its support") {
        const auto s = sample_inputs(spec, 20000, 5);
        for (std::size_t r = 0; r < s.rows; ++r) {
            for (std::size_t f = 0; f < kFactorCount; ++f) CHECK(spec.marginals[f].contains(s.row(r)[f]));
        }
        const auto i0 = s.column(Factor::i0);
        CHECK(*std::min_element(i0.begin(), i0.end()) == 184);
        CHECK(*std::max_element(i0.begin(), i0.end()) == 274);
    }
    SUBCASE("reproducible and independent of threads") {
        const auto a = sample_inputs(spec, 5000, 77, 1);
        const auto b = sample_inputs(spec, 5000, 77, 6);
        const auto c = sample_inputs_serial(spec, 5000, 77);
        CHECK(a.values == b.values);
        CHECK(a.values == c.values);
        CHECK(sample_inputs(spec, 5000, 78).values != a.values);
        // A longer sample extends a shorter one.
        const auto longer = sample_inputs(spec, 6000, 77);
        CHECK(std::equal(a.values.begin(), a.values.end(), longer.values.begin()));
    }
    SUBCASE("linear function mean within three standard errors") {
        const auto s = sample_inputs(spec, 40000, 11);
        const auto& m = spec.marginals[index(Factor::beta)];
        const double se = (m.upper - m.lower) / std::sqrt(12.0) / std::sqrt(40000.0);
        std::vector<double> y;
        for (std::size_t r = 0; r < s.rows; ++r) y.push_back(3.0 * s.at(r, Factor::beta) - 1.0);
        CHECK(std::abs(mean_of(y) - (3.0 * 2.0 - 1.0)) <= 3 * 3.0 * se);
    }
    SUBCASE("zero rows") { CHECK_THROWS_AS(sample_inputs(spec, 0, 1), EmptySample); }
}

TEST_CASE("ensemble evaluation") {
    const auto base = paper_config();
    const auto spec = InputDistributionSpec::around(kPost, 229);

    SUBCASE("baseline row equals the deterministic run") {
        InputSample s;
        s.spec = spec;
        s.rows = 1;
        s.values = {kPost.alpha, kPost.beta, kPost.gamma_inv, kPost.delta, 229, 0};
        const auto out = evaluate_ensemble(s, base, base.horizon_end);
        CHECK(out.values[0] == total_confirmed(simulate_two_regime(base)).back());
    }
    SUBCASE("a seven-day delay ends higher") {
        InputSample s;
        s.spec = spec;
        s.rows = 2;
        s.values = {kPost.alpha, kPost.beta, kPost.gamma_inv, kPost.delta, 229, 0,
                    kPost.alpha, kPost.beta, kPost.gamma_inv, kPost.delta, 229, 7};
        const auto out = evaluate_ensemble(s, base, base.horizon_end);
        CHECK(out.values[1] > out.values[0]);
    }
    SUBCASE("I0 scales exposed and keeps the population") {
        const std::vector<double> x{kPost.alpha, kPost.beta, kPost.gamma_inv, kPost.delta, 250, 2};
        const auto cfg = apply_factors(base, x);
        CHECK(cfg.init.i == 250);
        CHECK(cfg.init.e == 250);
        CHECK(cfg.init.total() == doctest::Approx(base.init.total()).epsilon(1e-15));
        CHECK(cfg.delay_days == 2);
        CHECK(cfg.pre == base.pre);
    }
    SUBCASE("serial and parallel agree bitwise") {
        const auto s = sample_inputs(spec, 300, 3);
        const auto a = evaluate_ensemble(s, base, base.horizon_end, {4});
        const auto b = evaluate_ensemble_serial(s, base, base.horizon_end);
        CHECK(a.values == b.values);
        CHECK(a.failed == b.failed);
        CHECK(a.failures() == 0);
    }
    SUBCASE("failed rows are flagged and counted") {
        InputDistributionSpec crowded = spec;
        crowded.marginals[index(Factor::i0)] = Marginal::discrete(7e7, 7e7 + 10);
        const auto s = sample_inputs(crowded, 20, 3);
        CHECK_THROWS_AS(evaluate_ensemble(s, base, base.horizon_end), FailureRateExceeded);
        EnsembleOptions lenient;
        lenient.max_failure_rate = 1.0;
        const auto out = evaluate_ensemble(s, base, base.horizon_end, lenient);
        CHECK(out.failures() == 20);
        CHECK(std::isnan(out.values[0]));
        CHECK(out.valid_values().empty());
    }
    SUBCASE("horizon outside the base range") {
        const auto s = sample_inputs(spec, 2, 3);
        CHECK_THROWS_AS(evaluate_ensemble(s, base, Date(2020, 5, 1)), OutOfRange);
    }
}

TEST_CASE("empirical statistics") {
    const std::vector<double> probs{0.025, 0.5, 0.975};

    SUBCASE("constant sample") {
        const std::vector<double> c(10, 4.5);
        const auto st = empirical_stats(c, probs);
        CHECK(st.mean == 4.5);
        CHECK(st.sd == 0);
        CHECK(st.degenerate);
        for (double q : st.quantiles) CHECK(q == 4.5);
    }
    SUBCASE("single value") {
        const std::vector<double> one{12};
        const auto st = empirical_stats(one, probs);
        CHECK(st.n == 1);
        CHECK(st.sd == 0);
        CHECK(st.degenerate);
    }
    SUBCASE("interpolated quantiles") {
        const std::vector<double> v{1, 2, 3, 4};
        CHECK(quantile_sorted(v, 0.5) == 2.5);
        CHECK(quantile_sorted(v, 0.0) == 1);
        CHECK(quantile_sorted(v, 1.0) == 4);
        CHECK(quantile_sorted(v, 0.25) == doctest::Approx(1.75));
        const std::vector<double> shuffled{3, 1, 4, 2};
        const auto st = empirical_stats(shuffled, std::vector<double>{0.5}, 4);
        CHECK(st.quantiles[0] == 2.5);
        CHECK(st.mean == 2.5);
        CHECK(st.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
        CHECK(st.histogram.counts == std::vector<std::size_t>{1, 1, 1, 1});
    }
    SUBCASE("histogram covers every value") {
        std::vector<double> v;
        for (int k = 0; k < 1000; ++k) v.push_back(std::sin(k) * 100);
        const auto st = empirical_stats(v, probs);
        CHECK(st.histogram.counts.size() == 100);
        CHECK(std::accumulate(st.histogram.counts.begin(), st.histogram.counts.end(), std::size_t{0}) == 1000);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(empirical_stats(std::vector<double>{}, probs), EmptySample);
        CHECK_THROWS_AS(quantile_sorted(std::vector<double>{1, 2}, 1.5), InputError);
    }
    SUBCASE("half-sample consistency") {
        std::vector<double> v;
        for (std::uint64_t k = 0; k < 20000; ++k) v.push_back(CounterRng(5).uniform(0, k));
        const auto full = empirical_stats(v, probs);
        const std::vector<double> half(v.begin(), v.begin() + 10000);
        const auto h = empirical_stats(half, probs);
        CHECK(std::abs(h.mean - full.mean) <= 4 * full.sd / std::sqrt(10000.0));
    }
}

TEST_CASE("sample csv") {
    const auto base = paper_config();
    const auto spec = InputDistributionSpec::around(kPost, 229);
    const auto in = sample_inputs(spec, 40, 8);
    auto out = evaluate_ensemble(in, base, base.horizon_end);
    out.failed[3] = 1;
    out.values[3] = std::nan("");
    const std::string csv = write_sample_csv(in, out);
    CHECK(csv.rfind("alpha,beta,gamma_inv,delta,i0,intervention_delay,total_confirmed,failed\n", 0) == 0);
    const auto table = read_sample_table(csv);
    CHECK(table.factor_names.size() == kFactorCount);
    CHECK(table.output.size() == 39);
    CHECK(table.factors[0][0] == in.at(0, Factor::alpha));
    CHECK(table.factors[5][3] == in.at(4, Factor::intervention_delay));
    CHECK(table.output[0] == out.values[0]);
    CHECK_THROWS_AS(read_sample_table(csv, "missing"), MissingColumn);
}
