#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "episens/data.hpp"
#include "episens/seir.hpp"

namespace episens {

/// 1 - SS_res / SS_tot. Throws DegenerateSeries for constant obs or fewer than two points,
/// LengthMismatch for unequal lengths.
double r_squared(std::span<const double> pred, std::span<const double> obs);

/// Root mean squared residual. Throws LengthMismatch (also for empty input).
double rmse(std::span<const double> pred, std::span<const double> obs);

/// Where the initial infectious count I(0) of a window comes from.
enum class InfectiousSeed {
    first_confirmed,  ///< total confirmed on the window's first day
    guess,            ///< the guess value, held fixed
    fitted,           ///< a free parameter started at the guess
};

/// Initial condition of a fitting window: Q, R, D from the first observation,
/// I(0) per `seed`, E(0) = exposed_ratio * I(0), P(0) = 0, S(0) closes the population.
struct InitPolicy {
    InfectiousSeed seed = InfectiousSeed::first_confirmed;
    double exposed_ratio = 1.0;
};

SeirState initial_state(const ObservedSeries& obs, double i0, double exposed_ratio, double n_pop);

struct Interval {
    double lower = 0;
    double upper = 0;
    bool contains(double v) const { return v >= lower && v <= upper; }
    bool fixed() const { return lower == upper; }
};

/// Box constraints; a degenerate interval pins the parameter.
struct FitBounds {
    std::array<Interval, 8> params;  ///< order of kParamKeys
    Interval i0{1.0, 1e6};

    static FitBounds defaults();
};

struct FitGuess {
    SeirParams params;
    double i0 = 1.0;
};

struct FitOptions {
    int starts = 5;
    double jitter = 0.10;  ///< relative half-width of start perturbations
    std::uint64_t seed = 1;
    double rel_tol = 1e-9;
    int max_iterations = 2000;  ///< per simplex run
    int max_restarts = 8;
    IntegratorOptions integrator{};
    int threads = 1;
};

struct FitResult {
    SeirParams params;
    SeirState init;
    double i0 = 0;
    std::array<double, 3> r2_by_series{};  ///< Q, R, D
    double r2_avg = 0;
    double r2_total = 0;
    double rmse_total = 0;
    double objective = 0;
    long n_evals = 0;
    bool converged = false;
    int best_start = 0;
    std::vector<double> objective_trace;  ///< best objective after each accepted iteration (winning start)
};

/// Sum over Q, R, D of squared residuals, each series scaled by its maximum observation.
double fit_objective(const ObservedSeries& obs, const SeirParams& params, const SeirState& init,
                     const IntegratorOptions& integrator = {});

/// Bounded multi-start Nelder-Mead least squares. Throws InfeasibleBounds when the guess is
/// outside the bounds and NoConvergence when there are fewer observations than free parameters.
/// A run that hits the iteration cap returns its best point with converged == false.
FitResult fit(const ObservedSeries& obs, const FitGuess& guess, const FitBounds& bounds,
              const InitPolicy& policy = {}, const FitOptions& options = {});

/// Model diagnostics of (params, init) against obs: R^2 per series, total-confirmed R^2 and RMSE.
FitResult evaluate_fit(const ObservedSeries& obs, const SeirParams& params, const SeirState& init,
                       const IntegratorOptions& integrator = {});

}  // namespace episens
