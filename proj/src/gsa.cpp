#include "episens/gsa.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <string>

#include "episens/error.hpp"
#include "episens/rng.hpp"

namespace episens {

FiniteChange finite_change_decomposition(const BlackBox& g, std::span<const double> from,
                                         std::span<const double> to) {
    if (from.size() != to.size()) throw LengthMismatch("endpoints differ in dimension");
    const std::size_t d = from.size();
    if (d == 0 || d > kMaxFactors) throw InputError("finite changes need 1 to 20 factors");
    const std::size_t vertices = std::size_t{1} << d;

    FiniteChange out;
    out.n_factors = d;
    out.from.assign(from.begin(), from.end());
    out.to.assign(to.begin(), to.end());
    out.effects.resize(vertices);

    Point x(d);
    for (std::size_t v = 0; v < vertices; ++v) {
        for (std::size_t i = 0; i < d; ++i) x[i] = (v >> i) & 1U ? to[i] : from[i];
        out.effects[v] = g(x);
    }
    out.y_from = out.effects[0];
    out.y_to = out.effects[vertices - 1];

    // In-place Moebius inversion over the subset lattice.
    for (std::size_t i = 0; i < d; ++i) {
        const std::size_t bit = std::size_t{1} << i;
        for (std::size_t v = 0; v < vertices; ++v) {
            if (v & bit) out.effects[v] -= out.effects[v ^ bit];
        }
    }
    out.effects[0] = 0;
    return out;
}

double newton_ratio(double phi_ij, double delta_i, double delta_j) {
    if (delta_i == 0 || delta_j == 0) throw ZeroDelta("Newton ratio undefined for a zero shift");
    return phi_ij / (delta_i * delta_j);
}

std::vector<std::optional<double>> newton_ratios(const FiniteChange& change) {
    std::vector<std::optional<double>> out;
    const std::size_t d = change.n_factors;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            const double di = change.to[i] - change.from[i];
            const double dj = change.to[j] - change.from[j];
            const auto z = static_cast<Subset>((1U << i) | (1U << j));
            if (di == 0 || dj == 0) {
                out.emplace_back();
            } else {
                out.emplace_back(newton_ratio(change.effect(z), di, dj));
            }
        }
    }
    return out;
}

PairSampler spec_pair_sampler(const InputDistributionSpec& spec) {
    spec.validate();
    return [spec](std::size_t replicate, std::uint64_t seed) {
        const CounterRng rng(seed);
        auto draw_row = [&](std::uint64_t row) {
            Point x(kFactorCount);
            for (std::size_t f = 0; f < kFactorCount; ++f) x[f] = draw_marginal(spec.marginals[f], rng, row, f);
            return x;
        };
        return std::pair{draw_row(2 * replicate), draw_row(2 * replicate + 1)};
    };
}

namespace {

FiniteChangeEnsemble prepare_ensemble(std::size_t n_replicates) {
    if (n_replicates == 0) throw TooFewSamples("replicated design needs at least one replicate");
    FiniteChangeEnsemble ens;
    ens.replicates.resize(n_replicates);
    return ens;
}

void finish_ensemble(FiniteChangeEnsemble& ens) {
    ens.n_factors = ens.replicates.front().n_factors;
    ens.evaluations = 0;
    for (const auto& r : ens.replicates) {
        if (r.n_factors != ens.n_factors) throw InputError("sampler returned points of varying dimension");
        ens.evaluations += static_cast<long>(r.effects.size());
    }
}

}  // namespace

FiniteChangeEnsemble replicated_factorial(const BlackBox& g, const PairSampler& sampler, std::size_t n_replicates,
                                          std::uint64_t seed, int threads) {
    FiniteChangeEnsemble ens = prepare_ensemble(n_replicates);
    std::vector<std::exception_ptr> failures(n_replicates);
    const auto count = static_cast<long>(n_replicates);
#pragma omp parallel for schedule(dynamic, 4) num_threads(std::max(1, threads))
    for (long k = 0; k < count; ++k) {
        const auto r = static_cast<std::size_t>(k);
        try {
            const auto [a, b] = sampler(r, seed);
            ens.replicates[r] = finite_change_decomposition(g, a, b);
        } catch (...) {
            failures[r] = std::current_exception();
        }
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
    finish_ensemble(ens);
    return ens;
}

FiniteChangeEnsemble replicated_factorial_serial(const BlackBox& g, const PairSampler& sampler,
                                                 std::size_t n_replicates, std::uint64_t seed) {
    FiniteChangeEnsemble ens = prepare_ensemble(n_replicates);
    for (std::size_t r = 0; r < n_replicates; ++r) {
        const auto [a, b] = sampler(r, seed);
        ens.replicates[r] = finite_change_decomposition(g, a, b);
    }
    finish_ensemble(ens);
    return ens;
}

double ensemble_output_variance(const FiniteChangeEnsemble& ens) {
    std::vector<double> ys;
    ys.reserve(2 * ens.replicates.size());
    for (const auto& r : ens.replicates) {
        ys.push_back(r.y_from);
        ys.push_back(r.y_to);
    }
    if (ys.size() < 2) return 0;
    const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double ss = 0;
    for (double y : ys) ss += (y - mean) * (y - mean);
    return ss / static_cast<double>(ys.size() - 1);
}

std::vector<double> total_indices_from_ensemble(const FiniteChangeEnsemble& ens, double output_variance) {
    if (!(output_variance > 0)) throw DegenerateVariance("output variance must be positive");
    if (ens.replicates.size() < 30) {
        throw TooFewSamples("total indices need at least 30 replicates, got " + std::to_string(ens.replicates.size()));
    }
    std::vector<double> out(ens.n_factors, 0.0);
    for (std::size_t i = 0; i < ens.n_factors; ++i) {
        double acc = 0;
        for (const auto& r : ens.replicates) {
            const double phi = r.effect(static_cast<Subset>(1U << i));
            acc += phi * phi;
        }
        out[i] = std::max(0.0, acc / static_cast<double>(ens.replicates.size()) / (2.0 * output_variance));
    }
    return out;
}

std::vector<double> mean_newton_ratios(const FiniteChangeEnsemble& ens) {
    const std::size_t pairs = ens.n_factors * (ens.n_factors - 1) / 2;
    std::vector<double> sum(pairs, 0.0);
    std::vector<std::size_t> count(pairs, 0);
    for (const auto& r : ens.replicates) {
        const auto ratios = newton_ratios(r);
        for (std::size_t p = 0; p < pairs; ++p) {
            if (ratios[p]) {
                sum[p] += *ratios[p];
                ++count[p];
            }
        }
    }
    std::vector<double> out(pairs);
    for (std::size_t p = 0; p < pairs; ++p) {
        out[p] = count[p] ? sum[p] / static_cast<double>(count[p]) : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

Partition make_partition(std::span<const double> x, std::size_t m_bins) {
    const std::size_t n = x.size();
    if (m_bins == 0) throw InputError("need at least one bin");
    if (n < 2 * m_bins) {
        throw TooFewSamples("given-data estimation with " + std::to_string(m_bins) + " bins needs at least " +
                            std::to_string(2 * m_bins) + " samples (recommended " +
                            std::to_string(100 * m_bins) + "), got " + std::to_string(n));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });

    std::size_t distinct = n ? 1 : 0;
    for (std::size_t k = 1; k < n && distinct <= m_bins; ++k) {
        if (x[order[k]] != x[order[k - 1]]) ++distinct;
    }

    Partition p;
    p.bin_of.resize(n);
    if (distinct <= m_bins) {
        p.bins = distinct;
        std::size_t bin = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k > 0 && x[order[k]] != x[order[k - 1]]) ++bin;
            p.bin_of[order[k]] = bin;
        }
    } else {
        p.bins = m_bins;
        for (std::size_t k = 0; k < n; ++k) p.bin_of[order[k]] = k * m_bins / n;
    }
    return p;
}

namespace {

void check_aligned(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw LengthMismatch("factor and output columns differ in length");
}

}  // namespace

double first_order_given_data(std::span<const double> x, std::span<const double> y, std::size_t m_bins) {
    check_aligned(x, y);
    const Partition part = make_partition(x, m_bins);
    const auto n = static_cast<double>(y.size());
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double total = 0;
    for (double v : y) total += (v - mean) * (v - mean);
    if (total == 0) return 0;

    std::vector<double> sums(part.bins, 0.0);
    std::vector<std::size_t> counts(part.bins, 0);
    for (std::size_t k = 0; k < y.size(); ++k) {
        sums[part.bin_of[k]] += y[k];
        ++counts[part.bin_of[k]];
    }
    double between = 0;
    for (std::size_t b = 0; b < part.bins; ++b) {
        const double cm = sums[b] / static_cast<double>(counts[b]);
        between += static_cast<double>(counts[b]) * (cm - mean) * (cm - mean);
    }
    return between / total;
}

double kuiper_beta(std::span<const double> x, std::span<const double> y, std::size_t m_bins) {
    check_aligned(x, y);
    const Partition part = make_partition(x, m_bins);
    const std::size_t n = y.size();

    // Dense rank of every y among the distinct pooled values, and the pooled CDF there.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return y[a] < y[b]; });
    std::vector<std::size_t> rank(n);
    std::vector<double> pooled_cdf;
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 0 || y[order[k]] != y[order[k - 1]]) pooled_cdf.push_back(0);
        rank[order[k]] = pooled_cdf.size() - 1;
        pooled_cdf.back() = static_cast<double>(k + 1) / static_cast<double>(n);
    }

    std::vector<std::vector<std::size_t>> members(part.bins);
    for (std::size_t k = 0; k < n; ++k) members[part.bin_of[k]].push_back(rank[k]);

    double beta = 0;
    for (auto& ranks : members) {
        std::sort(ranks.begin(), ranks.end());
        const auto nm = static_cast<double>(ranks.size());
        double above = 0;  // sup (F_bin - F)
        double below = 0;  // sup (F - F_bin)
        std::size_t k = 0;
        while (k < ranks.size()) {
            const std::size_t r = ranks[k];
            const double before = static_cast<double>(k) / nm;
            if (r > 0) below = std::max(below, pooled_cdf[r - 1] - before);
            while (k < ranks.size() && ranks[k] == r) ++k;
            const double after = static_cast<double>(k) / nm;
            above = std::max(above, after - pooled_cdf[r]);
            below = std::max(below, pooled_cdf[r] - after);
        }
        beta += nm / static_cast<double>(n) * (above + below);
    }
    return beta;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t k = 0; k < order.size();) {
        std::size_t j = k;
        while (j < order.size() && v[order[j]] == v[order[k]]) ++j;
        const double avg = 0.5 * static_cast<double>(k + j - 1);
        for (std::size_t t = k; t < j; ++t) ranks[order[t]] = avg;
        k = j;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const auto n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sab += (a[k] - ma) * (b[k] - mb);
        saa += (a[k] - ma) * (a[k] - ma);
        sbb += (b[k] - mb) * (b[k] - mb);
    }
    if (saa == 0 || sbb == 0) return 0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

ConditionalCurve conditional_regression(std::span<const double> x, std::span<const double> y, std::size_t m_bins,
                                        std::size_t factor) {
    check_aligned(x, y);
    const Partition part = make_partition(x, m_bins);
    ConditionalCurve curve;
    curve.factor = factor;
    std::vector<std::vector<double>> ys(part.bins);
    std::vector<double> xsum(part.bins, 0.0);
    for (std::size_t k = 0; k < y.size(); ++k) {
        ys[part.bin_of[k]].push_back(y[k]);
        xsum[part.bin_of[k]] += x[k];
    }
    for (std::size_t b = 0; b < part.bins; ++b) {
        auto& v = ys[b];
        const auto cnt = static_cast<double>(v.size());
        curve.populations.push_back(v.size());
        curve.centers.push_back(xsum[b] / cnt);
        curve.means.push_back(std::accumulate(v.begin(), v.end(), 0.0) / cnt);
        std::sort(v.begin(), v.end());
        curve.medians.push_back(quantile_sorted(v, 0.5));
    }
    curve.spearman = part.bins > 1 ? pearson(average_ranks(curve.centers), average_ranks(curve.means)) : 0.0;
    curve.direction = curve.spearman > 0 ? 1 : (curve.spearman < 0 ? -1 : 0);
    return curve;
}

double mean_dimension(std::span<const double> total_indices) {
    double sum = 0;
    for (double t : total_indices) {
        if (t < 0) throw InputError("total indices must be non-negative");
        sum += t;
    }
    return sum;
}

std::vector<Subset> subsets_by_order(std::size_t n_factors) {
    if (n_factors > kMaxFactors) throw InputError("too many factors");
    std::vector<Subset> subsets;
    for (Subset z = 1; z < (Subset{1} << n_factors); ++z) subsets.push_back(z);
    auto members = [](Subset z) {
        std::vector<std::size_t> m;
        for (std::size_t i = 0; z >> i; ++i) {
            if ((z >> i) & 1U) m.push_back(i);
        }
        return m;
    };
    std::stable_sort(subsets.begin(), subsets.end(), [&](Subset a, Subset b) {
        const int ca = std::popcount(a), cb = std::popcount(b);
        if (ca != cb) return ca < cb;
        return members(a) < members(b);
    });
    return subsets;
}

std::vector<SpectrumBar> interaction_spectrum(const FiniteChangeEnsemble& ens) {
    std::vector<SpectrumBar> bars;
    if (ens.replicates.empty()) return bars;
    for (Subset z : subsets_by_order(ens.n_factors)) {
        SpectrumBar bar;
        bar.subset = z;
        for (std::size_t i = 0; i < ens.n_factors; ++i) {
            if ((z >> i) & 1U) bar.members.push_back(i);
        }
        double acc = 0;
        for (const auto& r : ens.replicates) acc += std::abs(r.effect(z));
        bar.mean_abs_effect = acc / static_cast<double>(ens.replicates.size());
        bars.push_back(std::move(bar));
    }
    return bars;
}

std::vector<int> importance_ranks(std::span<const double> values) {
    std::vector<int> ranks(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        int better = 0;
        for (double v : values) {
            if (v > values[i]) ++better;
        }
        ranks[i] = better + 1;
    }
    return ranks;
}

SensitivityReport given_data_report(const std::vector<std::string>& names,
                                    const std::vector<std::vector<double>>& factors, std::span<const double> y,
                                    std::size_t m_bins, int threads) {
    if (names.size() != factors.size()) throw LengthMismatch("factor names and columns differ in count");
    const std::size_t d = factors.size();
    SensitivityReport rep;
    rep.factor_names = names;
    rep.given_data_n = y.size();
    rep.m_bins = m_bins;
    rep.first_order.resize(d);
    rep.kuiper.resize(d);
    rep.curves.resize(d);
    std::vector<std::exception_ptr> failures(d);
    const auto count = static_cast<long>(d);
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, threads))
    for (long k = 0; k < count; ++k) {
        const auto f = static_cast<std::size_t>(k);
        try {
            rep.first_order[f] = first_order_given_data(factors[f], y, m_bins);
            rep.kuiper[f] = kuiper_beta(factors[f], y, m_bins);
            rep.curves[f] = conditional_regression(factors[f], y, m_bins, f);
        } catch (...) {
            failures[f] = std::current_exception();
        }
    }
    for (const auto& e : failures) {
        if (e) std::rethrow_exception(e);
    }
    rep.rank_first_order = importance_ranks(rep.first_order);
    rep.rank_kuiper = importance_ranks(rep.kuiper);
    rep.interaction_fraction = 1.0 - std::accumulate(rep.first_order.begin(), rep.first_order.end(), 0.0);
    return rep;
}

void add_finite_changes(SensitivityReport& report, const FiniteChangeEnsemble& ens) {
    if (!report.factor_names.empty() && report.factor_names.size() != ens.n_factors) {
        throw LengthMismatch("ensemble and report differ in factor count");
    }
    report.replicates = ens.replicates.size();
    report.evaluations = ens.evaluations;
    report.output_variance = ensemble_output_variance(ens);
    report.total = total_indices_from_ensemble(ens, report.output_variance);
    report.rank_total = importance_ranks(report.total);
    report.mean_dimension = mean_dimension(report.total);
    report.newton_ratio_means = mean_newton_ratios(ens);
    report.spectrum = interaction_spectrum(ens);
}

}  // namespace episens
