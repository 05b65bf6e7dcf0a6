#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "qmagnet/channels.hpp"
#include "qmagnet/errors.hpp"
#include "qmagnet/evolve.hpp"
#include "qmagnet/state.hpp"

namespace qmagnet {

// Walking-wave state-dependent force on the two-ion stretch mode, in the
// frame rotating at the mode frequency after the rotating-wave approximation:
//   H(t) = sum_i g_i(s_i) b_i (a e^{i delta t} + a^dag e^{-i delta t})
// with g(up) = g_up, g(down) = force_ratio * g_up. The coupling is the
// product of the Lamb-Dicke factor and the force amplitude; the paper pins
// only the reachable J/hbar, so the default force is calibrated to it.
struct WalkingWaveParams {
    double omega_stretch = 2.0 * std::numbers::pi * 3.7e6;
    double delta = -2.0 * std::numbers::pi * 250e3;  // drive = omega_stretch + delta
    double lamb_dicke = 0.1;
    double force_up = 0.0;       // rad/s; g_up = lamb_dicke * force_up
    double force_ratio = -1.5;   // F_down = -3/2 F_up
    int fock_levels = 12;
    std::array<double, 2> mode_amplitudes = {std::numbers::sqrt2 / 2.0,
                                             -std::numbers::sqrt2 / 2.0};

    static constexpr int n_spins = 2;

    double g_up() const { return lamb_dicke * force_up; }
    double g_down() const { return force_ratio * g_up(); }
    double g_for(int spin_bit) const { return spin_bit ? g_down() : g_up(); }
    double loop_duration() const { return 2.0 * std::numbers::pi / std::abs(delta); }

    // per-spin-configuration drive strength G_s = sum_i b_i g(s_i)
    double sector_strength(std::size_t spin_index) const {
        double g = 0.0;
        for (int i = 0; i < n_spins; ++i)
            g += mode_amplitudes[static_cast<std::size_t>(i)] *
                 g_for(spin_bit(spin_index, i, n_spins));
        return g;
    }

    void validate() const {
        if (fock_levels < 8)
            throw std::invalid_argument("WalkingWaveParams: fock_levels must be >= 8");
        if (!(std::abs(delta) > 0.0) || !(std::abs(delta) < omega_stretch))
            throw std::invalid_argument("WalkingWaveParams: need 0 < |delta| < omega_stretch");
        if (force_ratio != -1.5)
            throw std::invalid_argument("WalkingWaveParams: force ratio is fixed at -3/2");
        if (!(lamb_dicke > 0.0))
            throw std::invalid_argument("WalkingWaveParams: lamb_dicke must be positive");
        if (!std::isfinite(force_up))
            throw std::invalid_argument("WalkingWaveParams: force amplitude must be finite");
    }

    // Force amplitude calibrated so |J_eff| matches the paper's reachable
    // coupling 2pi x 22.1 kHz at the default detuning and mode structure.
    static WalkingWaveParams paper_default() {
        WalkingWaveParams p;
        const double j_target = 2.0 * std::numbers::pi * 22.1e3;
        const double delta_g = std::sqrt(std::abs(p.delta) * j_target);  // spin-dependent part
        p.force_up = delta_g / (0.5 * (1.0 - p.force_ratio)) / p.lamb_dicke;
        return p;
    }
};

// Full spin x Fock Hamiltonian at time t; block diagonal across spin-z
// configurations (the force is spin-state conditioned).
inline Matrix build_walking_wave_hamiltonian(const WalkingWaveParams& params, double t) {
    params.validate();
    const int fock = params.fock_levels;
    const BasisShape shape{WalkingWaveParams::n_spins, fock};
    const auto dim = static_cast<Eigen::Index>(shape.dim());
    Matrix h = Matrix::Zero(dim, dim);
    const Complex drive_phase = std::polar(1.0, params.delta * t);
    for (std::size_t s = 0; s < shape.spin_dim(); ++s) {
        const double g = params.sector_strength(s);
        for (int n = 0; n + 1 < fock; ++n) {
            const double ladder = std::sqrt(static_cast<double>(n + 1));
            const auto row = static_cast<Eigen::Index>(shape.index(s, n));
            const auto col = static_cast<Eigen::Index>(shape.index(s, n + 1));
            // g (a e^{i delta t} + a^dag e^{-i delta t})
            h(row, col) += g * ladder * drive_phase;
            h(col, row) += g * ladder * std::conj(drive_phase);
        }
    }
    return h;
}

struct PhononCheckpoint {
    double t = 0.0;
    double spin_purity = 0.0;
    double mean_phonon = 0.0;
};

struct ClosedLoopResult {
    StateVector final_state;               // joint spin x Fock
    DensityMatrix spin_reduced;            // reduced spin state at closure
    double spin_purity = 0.0;
    double mean_phonon = 0.0;
    std::array<double, 4> phases_rel_uu{}; // accumulated phase per spin config,
                                           // unwrapped, relative to the uu sector
    std::vector<PhononCheckpoint> trajectory;
};

struct ClosedLoopOptions {
    double dt = 10e-9;
    int checkpoints_per_loop = 100;
};

// Evolve through n_loops closed phase-space loops (duration n 2pi/|delta|)
// starting from initial_spin x |0>. The four spin-basis columns are evolved
// jointly; any initial spin state follows by linearity. Aborts if the top two
// Fock levels accumulate more than 1e-6 population.
inline ClosedLoopResult run_closed_loop(const WalkingWaveParams& params, int n_loops,
                                        const StateVector& initial_spin,
                                        const ClosedLoopOptions& options = {}) {
    params.validate();
    if (n_loops < 1)
        throw std::invalid_argument("run_closed_loop: n_loops must be >= 1");
    if (initial_spin.shape.n_spins != 2 || initial_spin.shape.fock_levels != 1)
        throw std::invalid_argument("run_closed_loop: initial_spin must be a bare 2-spin state");
    if (!(options.dt > 0.0) || options.checkpoints_per_loop < 2)
        throw std::invalid_argument("run_closed_loop: bad integration options");

    const int fock = params.fock_levels;
    const BasisShape shape{2, fock};
    const auto dim = static_cast<Eigen::Index>(shape.dim());
    const HamiltonianFn hfn = [&params](double t) {
        return build_walking_wave_hamiltonian(params, t);
    };

    // columns: U(t) |s> x |0> for the four spin configurations
    Matrix columns = Matrix::Zero(dim, 4);
    for (int s = 0; s < 4; ++s)
        columns(static_cast<Eigen::Index>(shape.index(static_cast<std::size_t>(s), 0)), s) = 1.0;

    const double duration = n_loops * params.loop_duration();
    const int n_check = n_loops * options.checkpoints_per_loop;

    std::array<double, 4> phases{};
    std::array<double, 4> prev_arg{};
    ClosedLoopResult result{StateVector::basis_state(shape, 0),
                            DensityMatrix(BasisShape{2, 1}, Matrix::Zero(4, 4)),
                            0.0, 0.0, {}, {}};

    auto record = [&](double t) {
        // phase unwrapping from <s,0| U |s,0>; the overlap with the coherent
        // state keeps a positive real factor, so its argument is the
        // accumulated sector phase
        for (int s = 0; s < 4; ++s) {
            const Complex a = columns(static_cast<Eigen::Index>(
                                          shape.index(static_cast<std::size_t>(s), 0)), s);
            if (std::abs(a) < 1e-6)
                throw NumericalError("run_closed_loop: phase extraction lost the |0> component");
            const double arg = std::arg(a);
            double d = arg - prev_arg[static_cast<std::size_t>(s)];
            while (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
            while (d < -std::numbers::pi) d += 2.0 * std::numbers::pi;
            phases[static_cast<std::size_t>(s)] += d;
            prev_arg[static_cast<std::size_t>(s)] = arg;
        }
        // Fock truncation tripwire, per sector
        for (int s = 0; s < 4; ++s) {
            const double top2 =
                std::norm(columns(static_cast<Eigen::Index>(
                                      shape.index(static_cast<std::size_t>(s), fock - 1)), s)) +
                std::norm(columns(static_cast<Eigen::Index>(
                                      shape.index(static_cast<std::size_t>(s), fock - 2)), s));
            if (top2 > 1e-6)
                throw FockTruncationError(
                    "run_closed_loop: population reached the top Fock levels; raise fock_levels");
        }
        const Vector joint = columns * initial_spin.amplitudes;
        const StateVector psi(shape, joint);
        const DensityMatrix reduced = partial_trace(psi, KeepSelector::all_spins(2));
        double nbar = 0.0;
        for (std::size_t s = 0; s < 4; ++s)
            for (int nf = 0; nf < fock; ++nf)
                nbar += nf * std::norm(joint[static_cast<Eigen::Index>(shape.index(s, nf))]);
        result.trajectory.push_back({t, reduced.purity(), nbar});
    };

    record(0.0);
    double t_prev = 0.0;
    for (int k = 1; k <= n_check; ++k) {
        const double t_k = duration * static_cast<double>(k) / n_check;
        columns = evolve_columns(std::move(columns), hfn, t_prev, t_k, options.dt);
        t_prev = t_k;
        record(t_k);
    }

    result.final_state = StateVector(shape, columns * initial_spin.amplitudes);
    result.spin_reduced = partial_trace(result.final_state, KeepSelector::all_spins(2));
    result.spin_purity = result.trajectory.back().spin_purity;
    result.mean_phonon = result.trajectory.back().mean_phonon;
    for (int s = 0; s < 4; ++s)
        result.phases_rel_uu[static_cast<std::size_t>(s)] =
            phases[static_cast<std::size_t>(s)] - phases[0];
    return result;
}

struct EffectiveCoupling {
    double j_zz = 0.0;                        // rad/s, phase-extraction sign convention
    std::array<double, 2> single_spin_rates{};  // effective B_z-like rates per ion
    double enhancement = 0.0;                 // |omega_stretch / delta|
};

// Second-order (Magnus) rates from the decomposition g_i = gbar + Delta Z_i.
// Signs follow the loop-phase extraction convention of
// extract_coupling_numeric, so the two routes agree directly.
inline EffectiveCoupling effective_coupling_analytic(const WalkingWaveParams& params) {
    params.validate();
    if (params.delta == 0.0)
        throw std::invalid_argument("effective_coupling_analytic: delta must be nonzero");
    const double gbar = 0.5 * (params.g_up() + params.g_down());
    const double dg = 0.5 * (params.g_up() - params.g_down());
    const double b1 = params.mode_amplitudes[0];
    const double b2 = params.mode_amplitudes[1];
    EffectiveCoupling out;
    out.j_zz = -2.0 * dg * dg * b1 * b2 / params.delta;
    out.single_spin_rates = {-2.0 * gbar * dg * b1 * (b1 + b2) / params.delta,
                             -2.0 * gbar * dg * b2 * (b1 + b2) / params.delta};
    out.enhancement = std::abs(params.omega_stretch / params.delta);
    return out;
}

// Numeric oracle: one closed loop, J_eff from the four sector phases,
//   J = [phi(uu) + phi(dd) - phi(ud) - phi(du)] / (4 T).
inline double extract_coupling_numeric(const WalkingWaveParams& params,
                                       const ClosedLoopOptions& options = {}) {
    const StateVector plus_x = [] {
        Vector amps(4);
        amps << 0.5, 0.5, 0.5, 0.5;
        return StateVector(BasisShape{2, 1}, amps);
    }();
    const ClosedLoopResult loop = run_closed_loop(params, 1, plus_x, options);
    const double duration = params.loop_duration();
    const auto& ph = loop.phases_rel_uu;
    return (ph[0] + ph[3] - ph[1] - ph[2]) / (4.0 * duration);
}

// single-spin phase rates extracted from the same loop phases, matching the
// analytic single_spin_rates convention
inline std::array<double, 2> extract_single_spin_rates_numeric(
    const WalkingWaveParams& params, const ClosedLoopOptions& options = {}) {
    const StateVector plus_x = [] {
        Vector amps(4);
        amps << 0.5, 0.5, 0.5, 0.5;
        return StateVector(BasisShape{2, 1}, amps);
    }();
    const ClosedLoopResult loop = run_closed_loop(params, 1, plus_x, options);
    const double duration = params.loop_duration();
    const auto& ph = loop.phases_rel_uu;
    // phi(s) ~ -T [eps0 + beta_1 z1 + beta_2 z2 + J z1 z2]; invert for beta_i
    // in the phase convention (overall sign absorbed as in J_eff)
    const double b1 = (ph[0] + ph[1] - ph[2] - ph[3]) / (4.0 * duration);
    const double b2 = (ph[0] + ph[2] - ph[1] - ph[3]) / (4.0 * duration);
    return {b1, b2};
}

}  // namespace qmagnet
