#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "episens/uq.hpp"

namespace episens {

using Point = std::vector<double>;

/// Scalar model of a factor vector; must be safe to call concurrently.
using BlackBox = std::function<double(std::span<const double>)>;

/// Subsets of factors are bitmasks: bit i set means factor i belongs to the subset.
using Subset = std::uint32_t;

inline constexpr std::size_t kMaxFactors = 20;

/// Exact split of g(to) - g(from) into one effect per non-empty subset of factors.
struct FiniteChange {
    std::size_t n_factors = 0;
    Point from;
    Point to;
    double y_from = 0;
    double y_to = 0;
    std::vector<double> effects;  ///< indexed by subset mask; effects[0] is unused (0)

    double dy() const { return y_to - y_from; }
    double effect(Subset z) const { return effects[z]; }
};

/// Evaluates g on all 2^d vertices between `from` and `to` (coordinates in a subset taken
/// from `to`) and inverts the vertex values into subset effects:
///   phi_z = sum over w subset of z of (-1)^{|z|-|w|} g(vertex w).
/// Singletons are g(x_i shifted) - g(from); pairs subtract both singletons, and so on.
FiniteChange finite_change_decomposition(const BlackBox& g, std::span<const double> from,
                                         std::span<const double> to);

/// Second-order effect over the product of the two shifts. Throws ZeroDelta.
double newton_ratio(double phi_ij, double delta_i, double delta_j);

/// Newton ratio for every pair i < j in lexicographic order; empty where a shift is zero.
std::vector<std::optional<double>> newton_ratios(const FiniteChange& change);

struct FiniteChangeEnsemble {
    std::size_t n_factors = 0;
    std::vector<FiniteChange> replicates;
    long evaluations = 0;
};

/// Endpoint pair for replicate k under a given seed.
using PairSampler = std::function<std::pair<Point, Point>(std::size_t replicate, std::uint64_t seed)>;

/// Independent pairs drawn from the product measure: rows 2k and 2k+1 of the counter stream.
PairSampler spec_pair_sampler(const InputDistributionSpec& spec);

/// One decomposition per independent endpoint pair, parallel over replicates.
FiniteChangeEnsemble replicated_factorial(const BlackBox& g, const PairSampler& sampler, std::size_t n_replicates,
                                          std::uint64_t seed, int threads = 1);

/// Single-threaded reference for replicated_factorial.
FiniteChangeEnsemble replicated_factorial_serial(const BlackBox& g, const PairSampler& sampler,
                                                 std::size_t n_replicates, std::uint64_t seed);

/// Sample variance (n - 1) of every endpoint output in the ensemble.
double ensemble_output_variance(const FiniteChangeEnsemble& ens);

/// T_i = mean(phi_i^2) / (2 V), clipped at 0. Throws DegenerateVariance for V <= 0 and
/// TooFewSamples below 30 replicates.
std::vector<double> total_indices_from_ensemble(const FiniteChangeEnsemble& ens, double output_variance);

/// Average Newton ratio per pair over replicates where it is defined (NaN if never defined).
std::vector<double> mean_newton_ratios(const FiniteChangeEnsemble& ens);

/// Bins for given-data estimation: one per distinct value when there are at most m of them,
/// otherwise m equal-count bins of the sorted sample.
struct Partition {
    std::size_t bins = 0;
    std::vector<std::size_t> bin_of;  ///< bin index per sample
};

/// Throws TooFewSamples when n < 2 m.
Partition make_partition(std::span<const double> x, std::size_t m_bins);

/// Variance of bin-conditional means over the total variance (both population-weighted).
/// Returns 0 for a constant output.
double first_order_given_data(std::span<const double> x, std::span<const double> y, std::size_t m_bins = 50);

/// Bin-weighted Kuiper distance between conditional and pooled empirical CDFs, sups taken
/// over the pooled y values.
double kuiper_beta(std::span<const double> x, std::span<const double> y, std::size_t m_bins = 50);

struct ConditionalCurve {
    std::size_t factor = 0;
    std::vector<double> centers;  ///< mean of x within each bin
    std::vector<double> means;
    std::vector<double> medians;
    std::vector<std::size_t> populations;
    double spearman = 0;  ///< rank correlation of bin means against centers
    int direction = 0;    ///< sign of spearman
};

ConditionalCurve conditional_regression(std::span<const double> x, std::span<const double> y,
                                        std::size_t m_bins = 50, std::size_t factor = 0);

/// Sum of total indices. Throws InputError on a negative entry.
double mean_dimension(std::span<const double> total_indices);

struct SpectrumBar {
    Subset subset = 0;
    std::vector<std::size_t> members;
    double mean_abs_effect = 0;
};

/// Non-empty subsets ordered by size, then lexicographically by member list.
std::vector<Subset> subsets_by_order(std::size_t n_factors);

/// Mean |phi_z| for every non-empty subset, in subsets_by_order order.
std::vector<SpectrumBar> interaction_spectrum(const FiniteChangeEnsemble& ens);

/// 1-based ranks, 1 for the largest value; ties share the better rank.
std::vector<int> importance_ranks(std::span<const double> values);

/// Everything the sensitivity report carries; measures not computed stay empty.
struct SensitivityReport {
    std::vector<std::string> factor_names;
    std::size_t given_data_n = 0;
    std::size_t m_bins = 0;
    std::vector<double> first_order;
    std::vector<double> kuiper;
    std::vector<int> rank_first_order;
    std::vector<int> rank_kuiper;
    std::optional<double> interaction_fraction;  ///< 1 - sum S
    std::vector<ConditionalCurve> curves;

    std::size_t replicates = 0;
    long evaluations = 0;
    double output_variance = 0;
    std::vector<double> total;
    std::vector<int> rank_total;
    std::optional<double> mean_dimension;
    std::vector<double> newton_ratio_means;  ///< pairs i < j in lexicographic order
    std::vector<SpectrumBar> spectrum;
};

/// S, beta and conditional curves for every factor column, parallel across factors.
SensitivityReport given_data_report(const std::vector<std::string>& names,
                                    const std::vector<std::vector<double>>& factors, std::span<const double> y,
                                    std::size_t m_bins = 50, int threads = 1);

/// Adds total indices, mean dimension, Newton ratios and the interaction spectrum.
void add_finite_changes(SensitivityReport& report, const FiniteChangeEnsemble& ens);

}  // namespace episens
