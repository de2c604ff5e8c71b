#pragma once

#include <array>
#include <span>
#include <vector>

namespace episens {

/// Population used when a configuration does not override it (Italy, 2020).
inline constexpr double kDefaultPopulation = 60'360'000.0;

/// Compartment populations at one instant.
struct SeirState {
    double s = 0;  ///< susceptible
    double p = 0;  ///< insusceptible (protected)
    double e = 0;  ///< exposed, not yet infectious
    double i = 0;  ///< infectious
    double q = 0;  ///< quarantined (confirmed, currently positive)
    double r = 0;  ///< recovered
    double d = 0;  ///< deceased

    static constexpr std::size_t size = 7;

    std::array<double, size> to_array() const { return {s, p, e, i, q, r, d}; }
    static SeirState from_array(const std::array<double, size>& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
    }
    double total() const { return s + p + e + i + q + r + d; }
    double confirmed() const { return q + r + d; }

    bool operator==(const SeirState&) const = default;
};

/// Time derivative of every compartment; same layout as the state.
using SeirStateDerivative = SeirState;

/// Rate parameters of one regime. Rates are per day; gamma_inv is in days.
struct SeirParams {
    double alpha = 0;      ///< protection rate
    double beta = 0;       ///< infection rate
    double gamma_inv = 1;  ///< average latent time
    double delta = 0;      ///< quarantine rate
    double lambda0 = 0;    ///< cure-rate asymptote
    double lambda1 = 0;    ///< cure-rate onset
    double kappa0 = 0;     ///< initial mortality rate
    double kappa1 = 0;     ///< mortality-rate decay
    double n_pop = kDefaultPopulation;

    /// Throws InvalidParams unless all rates are >= 0, gamma_inv > 0 and n_pop > 0.
    void validate() const;

    bool operator==(const SeirParams&) const = default;
};

struct Trajectory {
    std::vector<double> t;  ///< days since the window start, strictly increasing
    std::vector<SeirState> states;
};

/// lambda(t) = lambda0 * (1 - exp(-lambda1 * t))
double cure_rate(double lambda0, double lambda1, double t);

/// kappa(t) = kappa0 * exp(-kappa1 * t)
double mortality_rate(double kappa0, double kappa1, double t);

/// Right-hand side of the seven-compartment system at regime-local time t.
SeirStateDerivative derivatives(const SeirState& state, const SeirParams& params, double t);

struct IntegratorOptions {
    /// Upper bound on the RK4 step; each grid interval is split into equal sub-steps.
    double max_step = 0.05;
};

/// Advances `state` from t0 to t1 with fixed-step RK4. Throws NonFiniteState.
SeirState advance(const SeirParams& params, const SeirState& state, double t0, double t1,
                  const IntegratorOptions& options = {});

/// Integrates on `t_grid` (first point is the initial time). Output states are
/// clamped: components in (-1e-9 n_pop, 0) become 0, anything lower throws NonFiniteState.
Trajectory integrate(const SeirParams& params, const SeirState& init, std::span<const double> t_grid,
                     const IntegratorOptions& options = {});

/// {0, 1, ..., days}
std::vector<double> day_grid(int days);

/// Q + R + D at every grid point.
std::vector<double> total_confirmed(const Trajectory& traj);

}  // namespace episens
