#include "episens/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "episens/error.hpp"
#include "episens/keyvalue.hpp"
#include "episens/rng.hpp"

namespace episens {

double r_squared(std::span<const double> pred, std::span<const double> obs) {
    if (pred.size() != obs.size()) throw LengthMismatch("r_squared: length mismatch");
    if (obs.size() < 2) throw DegenerateSeries("r_squared: need at least two points");
    const double mean = std::accumulate(obs.begin(), obs.end(), 0.0) / static_cast<double>(obs.size());
    double ss_res = 0, ss_tot = 0;
    for (std::size_t k = 0; k < obs.size(); ++k) {
        ss_res += (pred[k] - obs[k]) * (pred[k] - obs[k]);
        ss_tot += (obs[k] - mean) * (obs[k] - mean);
    }
    if (ss_tot == 0) throw DegenerateSeries("r_squared: observations are constant");
    return 1.0 - ss_res / ss_tot;
}

double rmse(std::span<const double> pred, std::span<const double> obs) {
    if (pred.size() != obs.size() || obs.empty()) throw LengthMismatch("rmse: length mismatch");
    double ss = 0;
    for (std::size_t k = 0; k < obs.size(); ++k) ss += (pred[k] - obs[k]) * (pred[k] - obs[k]);
    return std::sqrt(ss / static_cast<double>(obs.size()));
}

SeirState initial_state(const ObservedSeries& obs, double i0, double exposed_ratio, double n_pop) {
    if (obs.empty()) throw OutOfRange("initial_state: empty series");
    SeirState x;
    x.q = static_cast<double>(obs.quarantined.front());
    x.r = static_cast<double>(obs.recovered.front());
    x.d = static_cast<double>(obs.deceased.front());
    x.i = i0;
    x.e = exposed_ratio * i0;
    x.p = 0;
    x.s = n_pop - (x.e + x.i + x.q + x.r + x.d);
    if (x.s < 0 || i0 < 0 || exposed_ratio < 0) throw InvalidParams("initial state exceeds population");
    return x;
}

FitBounds FitBounds::defaults() {
    FitBounds b;
    b.params = {Interval{0.0, 1.0},  Interval{0.0, 2.0}, Interval{0.5, 30.0}, Interval{0.0, 1.0},
                Interval{0.0, 1.0},  Interval{0.0, 2.0}, Interval{0.0, 1.0},  Interval{0.0, 2.0}};
    return b;
}

namespace {

struct Series3 {
    std::array<std::vector<double>, 3> obs;
    std::array<double, 3> scale{};
};

Series3 fit_targets(const ObservedSeries& obs) {
    Series3 t;
    t.obs = {as_doubles(obs.quarantined), as_doubles(obs.recovered), as_doubles(obs.deceased)};
    for (std::size_t c = 0; c < 3; ++c) {
        const double m = *std::max_element(t.obs[c].begin(), t.obs[c].end());
        t.scale[c] = m > 0 ? m : 1.0;
    }
    return t;
}

double objective_of(const Series3& target, const SeirParams& params, const SeirState& init,
                    const IntegratorOptions& integrator) {
    const std::size_t n = target.obs[0].size();
    const auto grid = day_grid(static_cast<int>(n) - 1);
    Trajectory traj;
    try {
        traj = integrate(params, init, grid, integrator);
    } catch (const NumericalError&) {
        return std::numeric_limits<double>::infinity();
    }
    double total = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const SeirState& x = traj.states[k];
        const double model[3] = {x.q, x.r, x.d};
        for (std::size_t c = 0; c < 3; ++c) {
            const double res = (model[c] - target.obs[c][k]) / target.scale[c];
            total += res * res;
        }
    }
    return std::isfinite(total) ? total : std::numeric_limits<double>::infinity();
}

/// One free coordinate of the search, mapped to [0, 1] by its bounds.
struct FreeCoord {
    std::size_t slot;  // 0..7 params, 8 = i0
    Interval box;
};

struct Problem {
    const Series3* target;
    const ObservedSeries* obs;
    FitGuess guess;
    InitPolicy policy;
    IntegratorOptions integrator;
    std::vector<FreeCoord> free;
    double fixed_i0;

    FitGuess decode(const std::vector<double>& u) const {
        FitGuess g = guess;
        g.i0 = fixed_i0;
        for (std::size_t k = 0; k < free.size(); ++k) {
            const auto& c = free[k];
            const double v = c.box.lower + std::clamp(u[k], 0.0, 1.0) * (c.box.upper - c.box.lower);
            if (c.slot < 8) {
                param_ref(g.params, c.slot) = v;
            } else {
                g.i0 = v;
            }
        }
        return g;
    }

    SeirState init_for(const FitGuess& g) const {
        return initial_state(*obs, g.i0, policy.exposed_ratio, g.params.n_pop);
    }

    double operator()(const std::vector<double>& u) const {
        const FitGuess g = decode(u);
        SeirState init;
        try {
            init = init_for(g);
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
        return objective_of(*target, g.params, init, integrator);
    }
};

struct SimplexRun {
    std::vector<double> best;
    double value = 0;
    long evals = 0;
    bool converged = false;
    std::vector<double> trace;
};

// Nelder-Mead on the unit box; trial points are projected back onto the box.
SimplexRun nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                       const FitOptions& opt) {
    const std::size_t n = x0.size();
    SimplexRun run;
    auto eval = [&](std::vector<double>& x) {
        for (double& v : x) v = std::clamp(v, 0.0, 1.0);
        ++run.evals;
        return f(x);
    };

    double best_value = eval(x0);
    run.best = x0;
    run.value = best_value;
    run.trace.push_back(best_value);

    for (int restart = 0; restart <= opt.max_restarts; ++restart) {
        const double start_value = run.value;
        std::vector<std::vector<double>> pts(n + 1, run.best);
        std::vector<double> vals(n + 1, run.value);
        for (std::size_t k = 0; k < n; ++k) {
            const double step = pts[0][k] > 0.5 ? -0.05 : 0.05;
            pts[k + 1][k] += step;
            vals[k + 1] = eval(pts[k + 1]);
        }
        std::vector<std::size_t> order(n + 1);
        bool simplex_converged = false;
        for (int it = 0; it < opt.max_iterations; ++it) {
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
            const std::size_t lo = order.front(), hi = order.back(), nh = order[n - 1];
            const double spread = vals[hi] - vals[lo];
            if (spread <= opt.rel_tol * std::abs(vals[lo]) + 1e-300) {
                simplex_converged = true;
                break;
            }
            std::vector<double> centroid(n, 0.0);
            for (std::size_t k : order) {
                if (k == hi) continue;
                for (std::size_t c = 0; c < n; ++c) centroid[c] += pts[k][c] / static_cast<double>(n);
            }
            auto along = [&](double t) {
                std::vector<double> x(n);
                for (std::size_t c = 0; c < n; ++c) x[c] = centroid[c] + t * (pts[hi][c] - centroid[c]);
                return x;
            };
            std::vector<double> xr = along(-1.0);
            const double fr = eval(xr);
            if (fr < vals[lo]) {
                std::vector<double> xe = along(-2.0);
                const double fe = eval(xe);
                if (fe < fr) {
                    pts[hi] = std::move(xe);
                    vals[hi] = fe;
                } else {
                    pts[hi] = std::move(xr);
                    vals[hi] = fr;
                }
            } else if (fr < vals[nh]) {
                pts[hi] = std::move(xr);
                vals[hi] = fr;
            } else {
                const bool outside = fr < vals[hi];
                std::vector<double> xc = along(outside ? -0.5 : 0.5);
                const double fc = eval(xc);
                if (fc < (outside ? fr : vals[hi])) {
                    pts[hi] = std::move(xc);
                    vals[hi] = fc;
                } else {
                    for (std::size_t k = 0; k < n + 1; ++k) {
                        if (k == lo) continue;
                        for (std::size_t c = 0; c < n; ++c) pts[k][c] = pts[lo][c] + 0.5 * (pts[k][c] - pts[lo][c]);
                        vals[k] = eval(pts[k]);
                    }
                }
            }
            const auto best_it = std::min_element(vals.begin(), vals.end());
            if (*best_it < run.value) {
                run.value = *best_it;
                run.best = pts[static_cast<std::size_t>(best_it - vals.begin())];
            }
            run.trace.push_back(run.value);
        }
        const auto best_it = std::min_element(vals.begin(), vals.end());
        if (*best_it < run.value) {
            run.value = *best_it;
            run.best = pts[static_cast<std::size_t>(best_it - vals.begin())];
        }
        const double gain = start_value - run.value;
        if (simplex_converged && restart > 0 && gain <= opt.rel_tol * std::abs(run.value) + 1e-300) {
            run.converged = true;
            break;
        }
    }
    return run;
}

}  // namespace

double fit_objective(const ObservedSeries& obs, const SeirParams& params, const SeirState& init,
                     const IntegratorOptions& integrator) {
    return objective_of(fit_targets(obs), params, init, integrator);
}

FitResult evaluate_fit(const ObservedSeries& obs, const SeirParams& params, const SeirState& init,
                       const IntegratorOptions& integrator) {
    const auto grid = day_grid(static_cast<int>(obs.size()) - 1);
    const Trajectory traj = integrate(params, init, grid, integrator);
    std::array<std::vector<double>, 3> model;
    for (const auto& x : traj.states) {
        model[0].push_back(x.q);
        model[1].push_back(x.r);
        model[2].push_back(x.d);
    }
    const auto target = fit_targets(obs);
    FitResult out;
    out.params = params;
    out.init = init;
    out.i0 = init.i;
    for (std::size_t c = 0; c < 3; ++c) out.r2_by_series[c] = r_squared(model[c], target.obs[c]);
    out.r2_avg = (out.r2_by_series[0] + out.r2_by_series[1] + out.r2_by_series[2]) / 3.0;
    const auto total_model = total_confirmed(traj);
    const auto total_obs = as_doubles(obs.total_confirmed);
    out.r2_total = r_squared(total_model, total_obs);
    out.rmse_total = rmse(total_model, total_obs);
    out.objective = objective_of(target, params, init, integrator);
    return out;
}

FitResult fit(const ObservedSeries& obs, const FitGuess& guess, const FitBounds& bounds,
              const InitPolicy& policy, const FitOptions& options) {
    guess.params.validate();
    for (std::size_t k = 0; k < 8; ++k) {
        const Interval& box = bounds.params[k];
        if (box.lower > box.upper) throw InfeasibleBounds(std::string("empty interval for ") + kParamKeys[k]);
        if (!box.contains(param_value(guess.params, k))) {
            throw InfeasibleBounds(std::string("guess for ") + kParamKeys[k] + " lies outside its bounds");
        }
    }
    if (policy.seed == InfectiousSeed::fitted &&
        (bounds.i0.lower > bounds.i0.upper || !bounds.i0.contains(guess.i0))) {
        throw InfeasibleBounds("guess for i0 lies outside its bounds");
    }

    Problem problem;
    const Series3 target = obs.empty() ? Series3{} : fit_targets(obs);
    problem.target = &target;
    problem.obs = &obs;
    problem.guess = guess;
    problem.policy = policy;
    problem.integrator = options.integrator;
    problem.fixed_i0 = policy.seed == InfectiousSeed::first_confirmed && !obs.empty()
                           ? static_cast<double>(obs.total_confirmed.front())
                           : guess.i0;
    for (std::size_t k = 0; k < 8; ++k) {
        if (!bounds.params[k].fixed()) problem.free.push_back({k, bounds.params[k]});
    }
    if (policy.seed == InfectiousSeed::fitted && !bounds.i0.fixed()) problem.free.push_back({8, bounds.i0});

    if (obs.size() < std::max<std::size_t>(problem.free.size(), 2)) {
        throw NoConvergence("under-determined fit: " + std::to_string(obs.size()) + " observations for " +
                            std::to_string(problem.free.size()) + " free parameters");
    }

    std::vector<double> u0(problem.free.size());
    for (std::size_t k = 0; k < u0.size(); ++k) {
        const auto& c = problem.free[k];
        const double v = c.slot < 8 ? param_value(guess.params, c.slot) : guess.i0;
        u0[k] = (v - c.box.lower) / (c.box.upper - c.box.lower);
    }

    const int starts = std::max(1, options.starts);
    const CounterRng rng(options.seed);
    std::vector<SimplexRun> runs(static_cast<std::size_t>(starts));

#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, options.threads))
    for (int s = 0; s < starts; ++s) {
        std::vector<double> x = u0;
        if (s > 0) {
            const FitGuess base = problem.decode(u0);
            for (std::size_t k = 0; k < x.size(); ++k) {
                const auto& c = problem.free[k];
                const double v = c.slot < 8 ? param_value(base.params, c.slot) : base.i0;
                const double factor = 1.0 + options.jitter * (2.0 * rng.uniform(static_cast<std::uint64_t>(s), k) - 1.0);
                const double jittered = std::clamp(v * factor, c.box.lower, c.box.upper);
                x[k] = (jittered - c.box.lower) / (c.box.upper - c.box.lower);
            }
        }
        runs[static_cast<std::size_t>(s)] = nelder_mead(problem, x, options);
    }

    std::size_t best = 0;
    long evals = 0;
    for (std::size_t s = 0; s < runs.size(); ++s) {
        evals += runs[s].evals;
        if (runs[s].value < runs[best].value) best = s;
    }
    const FitGuess winner = problem.decode(runs[best].best);
    const SeirState init = problem.init_for(winner);

    FitResult out = evaluate_fit(obs, winner.params, init, options.integrator);
    out.i0 = winner.i0;
    out.n_evals = evals;
    out.converged = runs[best].converged;
    out.best_start = static_cast<int>(best);
    out.objective_trace = std::move(runs[best].trace);
    return out;
}

}  // namespace episens
