#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "episens/date.hpp"
#include "episens/rng.hpp"
#include "episens/scenario.hpp"
#include "episens/seir.hpp"

namespace episens {

/// Uncertain inputs of the forecast, in sample-column order.
enum class Factor : std::size_t { alpha, beta, gamma_inv, delta, i0, intervention_delay };

inline constexpr std::size_t kFactorCount = 6;
inline constexpr std::array<const char*, kFactorCount> kFactorNames = {
    "alpha", "beta", "gamma_inv", "delta", "i0", "intervention_delay"};

constexpr std::size_t index(Factor f) { return static_cast<std::size_t>(f); }

struct Marginal {
    enum class Kind { continuous_uniform, discrete_uniform };
    Kind kind = Kind::continuous_uniform;
    double lower = 0;
    double upper = 0;

    static Marginal uniform(double lower, double upper) { return {Kind::continuous_uniform, lower, upper}; }
    /// Integers in [lower, upper].
    static Marginal discrete(double lower, double upper) { return {Kind::discrete_uniform, lower, upper}; }
    /// Continuous uniform on center * (1 +- rel).
    static Marginal relative(double center, double rel) {
        return uniform(center * (1.0 - rel), center * (1.0 + rel));
    }
    /// Integers in [ceil(center (1 - rel)), floor(center (1 + rel))].
    static Marginal discrete_relative(double center, double rel);

    bool contains(double v) const;
    bool operator==(const Marginal&) const = default;
};

/// Relative half-widths of the default input distribution.
struct RelativeWidths {
    double alpha = 0.10;
    double beta = 0.10;
    double gamma_inv = 0.10;
    double delta = 0.30;
    double i0 = 0.20;
    int max_delay = 7;  ///< intervention delay is uniform on {0, ..., max_delay} days
};

/// Independent marginals of the six factors.
struct InputDistributionSpec {
    std::array<Marginal, kFactorCount> marginals;

    /// Uniform boxes around the post-intervention rates, discrete I0 and delay.
    static InputDistributionSpec around(const SeirParams& post, double i0, const RelativeWidths& widths = {});

    /// Throws EmptySupport for empty or negative supports.
    void validate() const;
    bool operator==(const InputDistributionSpec&) const = default;
};

/// Row-major n x 6 matrix of factor values.
struct InputSample {
    InputDistributionSpec spec;
    std::uint64_t seed = 0;
    std::size_t rows = 0;
    std::vector<double> values;

    std::span<const double> row(std::size_t r) const { return {values.data() + r * kFactorCount, kFactorCount}; }
    double at(std::size_t r, Factor f) const { return values[r * kFactorCount + index(f)]; }
    std::vector<double> column(Factor f) const;
};

/// One draw of marginal m for (row, factor); the factor index selects the RNG stream.
double draw_marginal(const Marginal& m, const CounterRng& rng, std::uint64_t row, std::uint64_t factor);

/// Draw for (seed, row, factor) is independent of every other draw, so the result does not
/// depend on the number of threads. Throws EmptySupport.
InputSample sample_inputs(const InputDistributionSpec& spec, std::size_t n, std::uint64_t seed, int threads = 1);

/// Single-threaded reference for sample_inputs.
InputSample sample_inputs_serial(const InputDistributionSpec& spec, std::size_t n, std::uint64_t seed);

/// Point of the input space mapped onto the two-regime configuration: the four post rates,
/// I(0) (exposed scaled by the base E/I ratio, S absorbing the difference) and the delay.
TwoRegimeConfig apply_factors(const TwoRegimeConfig& base, std::span<const double> factors);

/// Total confirmed on base.horizon_end for one factor vector.
double horizon_output(const TwoRegimeConfig& base, std::span<const double> factors,
                      const IntegratorOptions& integrator = {});

struct OutputSample {
    std::vector<double> values;         ///< NaN on failed rows
    std::vector<std::uint8_t> failed;   ///< 1 where the simulation failed

    std::size_t failures() const;
    std::vector<double> valid_values() const;
};

struct EnsembleOptions {
    int threads = 1;
    IntegratorOptions integrator{};
    double max_failure_rate = 0.001;
};

/// Runs the model on every row up to `horizon_day`. Failed rows are flagged; more than
/// max_failure_rate of them throws FailureRateExceeded.
OutputSample evaluate_ensemble(const InputSample& samples, const TwoRegimeConfig& base, Date horizon_day,
                               const EnsembleOptions& options = {});

/// Single-threaded reference for evaluate_ensemble.
OutputSample evaluate_ensemble_serial(const InputSample& samples, const TwoRegimeConfig& base, Date horizon_day,
                                      const EnsembleOptions& options = {});

struct Histogram {
    double lower = 0;
    double upper = 0;
    std::vector<std::size_t> counts;
};

struct EmpiricalStats {
    std::size_t n = 0;
    double mean = 0;
    double sd = 0;  ///< n - 1 denominator; 0 when n == 1
    bool degenerate = false;  ///< n == 1 or zero spread
    std::vector<double> probabilities;
    std::vector<double> quantiles;
    Histogram histogram;
};

/// Linear interpolation between order statistics (h = (n - 1) p) of a sorted sample.
double quantile_sorted(std::span<const double> sorted, double p);

/// Mean, sd, quantiles and an equal-width histogram over [min, max]. Throws EmptySample.
EmpiricalStats empirical_stats(std::span<const double> values, std::span<const double> probabilities,
                               std::size_t bins = 100);

/// Flat CSV: one row per sample, factor columns then `total_confirmed,failed`.
std::string write_sample_csv(const InputSample& inputs, const OutputSample& outputs);

/// Columns of a sample CSV for given-data analysis; rows flagged `failed` are skipped.
struct SampleTable {
    std::vector<std::string> factor_names;
    std::vector<std::vector<double>> factors;  ///< one vector per factor column
    std::vector<double> output;
};

/// Reads any CSV whose header names factor columns plus `output_column`. Throws InputError.
SampleTable read_sample_table(std::string_view text, const std::string& output_column = "total_confirmed");

}  // namespace episens
