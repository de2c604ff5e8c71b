#include "episens/seir.hpp"

#include <cmath>
#include <string>

#include "episens/error.hpp"

namespace episens {

namespace {

using StateArray = std::array<double, SeirState::size>;

constexpr double kClampFraction = 1e-9;

StateArray rhs(const StateArray& y, const SeirParams& p, double t) {
    return derivatives(SeirState::from_array(y), p, t).to_array();
}

bool all_finite(const StateArray& y) {
    for (double v : y) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void rk4_step(StateArray& y, const SeirParams& p, double t, double h) {
    StateArray tmp;
    const StateArray k1 = rhs(y, p, t);
    for (std::size_t c = 0; c < y.size(); ++c) tmp[c] = y[c] + 0.5 * h * k1[c];
    const StateArray k2 = rhs(tmp, p, t + 0.5 * h);
    for (std::size_t c = 0; c < y.size(); ++c) tmp[c] = y[c] + 0.5 * h * k2[c];
    const StateArray k3 = rhs(tmp, p, t + 0.5 * h);
    for (std::size_t c = 0; c < y.size(); ++c) tmp[c] = y[c] + h * k3[c];
    const StateArray k4 = rhs(tmp, p, t + h);
    for (std::size_t c = 0; c < y.size(); ++c) {
        y[c] += (h / 6.0) * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    }
}

SeirState clamp_output(const SeirState& state, double n_pop, double t) {
    StateArray y = state.to_array();
    for (double& v : y) {
        if (v >= 0) continue;
        if (v > -kClampFraction * n_pop) {
            v = 0;
        } else {
            throw NonFiniteState("compartment went negative (" + std::to_string(v) + ") at t=" +
                                 std::to_string(t));
        }
    }
    return SeirState::from_array(y);
}

}  // namespace

void SeirParams::validate() const {
    const bool ok = alpha >= 0 && beta >= 0 && gamma_inv > 0 && delta >= 0 && lambda0 >= 0 &&
                    lambda1 >= 0 && kappa0 >= 0 && kappa1 >= 0 && n_pop > 0 &&
                    std::isfinite(alpha + beta + gamma_inv + delta + lambda0 + lambda1 + kappa0 +
                                  kappa1 + n_pop);
    if (!ok) throw InvalidParams("SEIR parameters out of domain");
}

double cure_rate(double lambda0, double lambda1, double t) {
    return lambda0 * (1.0 - std::exp(-lambda1 * t));
}

double mortality_rate(double kappa0, double kappa1, double t) {
    return kappa0 * std::exp(-kappa1 * t);
}

SeirStateDerivative derivatives(const SeirState& x, const SeirParams& p, double t) {
    const double infection = p.beta * x.s * x.i / p.n_pop;
    const double protection = p.alpha * x.s;
    const double incubation = x.e / p.gamma_inv;
    const double quarantine = p.delta * x.i;
    const double recovery = cure_rate(p.lambda0, p.lambda1, t) * x.q;
    const double death = mortality_rate(p.kappa0, p.kappa1, t) * x.q;

    SeirStateDerivative dx;
    dx.s = -protection - infection;
    dx.p = protection;
    dx.e = infection - incubation;
    dx.i = incubation - quarantine;
    dx.q = quarantine - recovery - death;
    dx.r = recovery;
    dx.d = death;
    return dx;
}

SeirState advance(const SeirParams& params, const SeirState& state, double t0, double t1,
                  const IntegratorOptions& options) {
    if (!(options.max_step > 0)) throw InvalidParams("integrator step must be positive");
    StateArray y = state.to_array();
    const double span = t1 - t0;
    if (span <= 0) return state;
    const auto steps = static_cast<long>(std::ceil(span / options.max_step - 1e-9));
    const double h = span / static_cast<double>(steps);
    for (long k = 0; k < steps; ++k) {
        rk4_step(y, params, t0 + static_cast<double>(k) * h, h);
        if (!all_finite(y)) {
            throw NonFiniteState("non-finite state at t=" +
                                 std::to_string(t0 + static_cast<double>(k + 1) * h));
        }
    }
    return SeirState::from_array(y);
}

Trajectory integrate(const SeirParams& params, const SeirState& init, std::span<const double> t_grid,
                     const IntegratorOptions& options) {
    params.validate();
    Trajectory traj;
    if (t_grid.empty()) return traj;
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        if (!(t_grid[k] > t_grid[k - 1])) throw InvalidParams("time grid must be strictly increasing");
    }
    traj.t.assign(t_grid.begin(), t_grid.end());
    traj.states.reserve(t_grid.size());

    SeirState current = init;
    traj.states.push_back(clamp_output(current, params.n_pop, t_grid[0]));
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        // Keep integrating the unclamped state so output clamping never feeds back.
        current = advance(params, current, t_grid[k - 1], t_grid[k], options);
        traj.states.push_back(clamp_output(current, params.n_pop, t_grid[k]));
    }
    return traj;
}

std::vector<double> day_grid(int days) {
    std::vector<double> grid(static_cast<std::size_t>(days) + 1);
    for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = static_cast<double>(k);
    return grid;
}

std::vector<double> total_confirmed(const Trajectory& traj) {
    std::vector<double> out;
    out.reserve(traj.states.size());
    for (const auto& s : traj.states) out.push_back(s.confirmed());
    return out;
}

}  // namespace episens
