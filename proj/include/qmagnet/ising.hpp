#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "qmagnet/channels.hpp"
#include "qmagnet/evolve.hpp"
#include "qmagnet/operators.hpp"
#include "qmagnet/ramp.hpp"
#include "qmagnet/state.hpp"

namespace qmagnet {

enum class CouplingRange { NearestNeighbour, AllPairs };
enum class Orientation { PlusX, MinusX };

// H(t) = field_sign * B_x sum_i X_i + J(t) sum_pairs Z_i Z_j + B_z sum_i Z_i
// All rates are angular frequencies in rad/s; J_max < 0 means ferromagnetic.
// field_sign = -1 makes the prepared plus_x state the ground state of the
// field term; +1 reproduces the literal field term (same populations by the
// global -H equivalence).
struct IsingConfig {
    int n_spins = 2;
    double b_x = 2.0 * std::numbers::pi * 4.24e3;
    double j_max = -5.2 * 2.0 * std::numbers::pi * 4.24e3;
    double b_z_bias = 0.0;
    CouplingRange coupling_range = CouplingRange::NearestNeighbour;
    double gamma_dephasing = 0.0;
    double field_sign = -1.0;

    void validate_static() const {
        if (n_spins < 2 || n_spins > 10)
            throw std::invalid_argument("IsingConfig: n_spins must be in [2, 10]");
        if (field_sign != 1.0 && field_sign != -1.0)
            throw std::invalid_argument("IsingConfig: field_sign must be +1 or -1");
        if (gamma_dephasing < 0.0)
            throw std::invalid_argument("IsingConfig: gamma_dephasing must be >= 0");
    }

    void validate_adiabatic() const {
        validate_static();
        if (!(b_x > 0.0))
            throw std::invalid_argument("IsingConfig: B_x must be > 0 for an adiabatic run");
        if (gamma_dephasing > 0.0 && n_spins > 3)
            throw std::invalid_argument(
                "IsingConfig: dephasing runs are supported only for n_spins <= 3");
    }

    std::vector<std::pair<int, int>> pairs() const {
        std::vector<std::pair<int, int>> p;
        if (coupling_range == CouplingRange::NearestNeighbour) {
            for (int i = 0; i + 1 < n_spins; ++i) p.emplace_back(i, i + 1);
        } else {
            for (int i = 0; i < n_spins; ++i)
                for (int j = i + 1; j < n_spins; ++j) p.emplace_back(i, j);
        }
        return p;
    }
};

struct RotationPulse {
    double theta = 0.0;
    double phi = 0.0;
};

inline std::vector<OperatorTerm> ising_terms(const IsingConfig& cfg, double j_value) {
    std::vector<OperatorTerm> terms;
    for (int i = 0; i < cfg.n_spins; ++i)
        terms.push_back({cfg.field_sign * cfg.b_x, {{i, PauliAxis::X}}});
    if (cfg.b_z_bias != 0.0)
        for (int i = 0; i < cfg.n_spins; ++i)
            terms.push_back({cfg.b_z_bias, {{i, PauliAxis::Z}}});
    if (j_value != 0.0)
        for (auto [i, j] : cfg.pairs())
            terms.push_back({j_value, {{i, PauliAxis::Z}, {j, PauliAxis::Z}}});
    return terms;
}

inline Matrix ising_hamiltonian(const IsingConfig& cfg, double j_value) {
    const auto terms = ising_terms(cfg, j_value);
    return build_many_body_operator(std::span<const OperatorTerm>(terms), cfg.n_spins, 1);
}

// single-spin matrix of Eq. 2: cos(theta/2) I - i sin(theta/2)(cos phi X + sin phi Y)
inline Eigen::Matrix2cd rotation_matrix(const RotationPulse& pulse) {
    const double c = std::cos(0.5 * pulse.theta);
    const double s = std::sin(0.5 * pulse.theta);
    const Complex mi(0.0, -1.0);
    Eigen::Matrix2cd r;
    // X = [[0,1],[1,0]], Y = [[0,-i],[i,0]] in the (up, down) basis
    r(0, 0) = c;
    r(1, 1) = c;
    r(0, 1) = mi * s * Complex(std::cos(pulse.phi), -std::sin(pulse.phi));
    r(1, 0) = mi * s * Complex(std::cos(pulse.phi), std::sin(pulse.phi));
    return r;
}

// the same pulse applied to every spin; identity on the Fock factor
inline Matrix collective_rotation(const RotationPulse& pulse, const BasisShape& shape) {
    const Eigen::Matrix2cd r = rotation_matrix(pulse);
    const auto dim = static_cast<Eigen::Index>(shape.dim());
    Matrix out = Matrix::Zero(dim, dim);
    const std::size_t sd = shape.spin_dim();
    for (std::size_t col = 0; col < sd; ++col) {
        for (std::size_t row = 0; row < sd; ++row) {
            Complex amp = 1.0;
            for (int i = 0; i < shape.n_spins && amp != 0.0; ++i)
                amp *= r(spin_bit(row, i, shape.n_spins), spin_bit(col, i, shape.n_spins));
            if (amp == 0.0) continue;
            for (int f = 0; f < shape.fock_levels; ++f)
                out(static_cast<Eigen::Index>(shape.index(row, f)),
                    static_cast<Eigen::Index>(shape.index(col, f))) = amp;
        }
    }
    return out;
}

inline StateVector rotate(const StateVector& state, const RotationPulse& pulse) {
    return StateVector(state.shape, collective_rotation(pulse, state.shape) * state.amplitudes);
}

inline DensityMatrix rotate(const DensityMatrix& rho, const RotationPulse& pulse) {
    const Matrix u = collective_rotation(pulse, rho.shape);
    return DensityMatrix(rho.shape, u * rho.entries * u.adjoint());
}

// duration of a pulse with angle theta at field strength b_x (theta/2 = B_x t)
inline double duration_for_angle(double theta, double b_x) { return 0.5 * theta / b_x; }

// |down...down> rotated by R(pi/2, -pi/2) for plus_x, R(pi/2, +pi/2) for minus_x
inline StateVector prepare_initial(Orientation orientation, int n_spins) {
    const BasisShape shape{n_spins, 1};
    StateVector down_all = StateVector::basis_state(shape, spin_index_all_down(n_spins));
    const double phi = orientation == Orientation::PlusX ? -std::numbers::pi / 2
                                                         : std::numbers::pi / 2;
    return rotate(down_all, {std::numbers::pi / 2, phi});
}

struct TrajectoryPoint {
    double t = 0.0;               // seconds
    double ratio = 0.0;           // |J(t)| / B_x
    double p_dd = 0.0;            // all spins down
    double p_uu = 0.0;            // all spins up
    double p_mixed = 0.0;         // everything else
    double eigenstate_overlap = 0.0;  // with the adiabatically tracked eigenstate
};

struct AdiabaticResult {
    std::vector<TrajectoryPoint> trajectory;
    std::optional<StateVector> final_state;      // pure path (gamma == 0)
    std::optional<DensityMatrix> final_density;  // open path (gamma > 0)
    bool adiabatic_warning = false;              // final overlap < 0.9

    const TrajectoryPoint& final_point() const { return trajectory.back(); }
};

struct AdiabaticOptions {
    double dt = 10e-9;
    std::optional<double> t_end;  // early termination (sweep use); default t_total
};

namespace detail {

// Track the instantaneous eigenstate adiabatically connected to `reference`:
// pick the eigenvector with maximal overlap, then use it as the next reference.
inline Vector track_eigenstate(const Matrix& hamiltonian, const Vector& reference) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hamiltonian);
    const Matrix& v = es.eigenvectors();
    Eigen::Index best = 0;
    double best_ov = -1.0;
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
        const double ov = std::abs(reference.dot(v.col(k)));
        if (ov > best_ov) {
            best_ov = ov;
            best = k;
        }
    }
    return v.col(best);
}

}  // namespace detail

// Adiabatic run of Eq. 1 under the ramp schedule: the field term is constant,
// the coupling follows ramp_value(t) * j_max. Populations and the overlap with
// the tracked instantaneous eigenstate are recorded at n_steps checkpoints.
inline AdiabaticResult run_adiabatic(const IsingConfig& cfg, const RampSchedule& schedule,
                                     Orientation orientation,
                                     const AdiabaticOptions& options = {}) {
    cfg.validate_adiabatic();
    schedule.validate();
    if (!(options.dt > 0.0))
        throw std::invalid_argument("run_adiabatic: dt must be positive");
    const double t_end = options.t_end.value_or(schedule.t_total);
    if (t_end < 0.0 || t_end > schedule.t_total * (1.0 + 1e-12))
        throw std::invalid_argument("run_adiabatic: t_end outside [0, t_total]");

    const HamiltonianFn hfn = [&](double t) {
        return ising_hamiltonian(cfg, ramp_value(schedule, t) * cfg.j_max);
    };

    const StateVector initial = prepare_initial(orientation, cfg.n_spins);
    const std::size_t idx_uu = spin_index_all_up(cfg.n_spins);
    const std::size_t idx_dd = spin_index_all_down(cfg.n_spins);

    AdiabaticResult result;
    Vector tracked = initial.amplitudes;

    const bool open_system = cfg.gamma_dephasing > 0.0;
    StateVector psi = initial;
    DensityMatrix rho = DensityMatrix::from_pure(initial);

    const int n_check = t_end > 0.0 ? schedule.n_steps : 1;
    double t_prev = 0.0;
    for (int k = 1; k <= n_check; ++k) {
        const double t_k = t_end * static_cast<double>(k) / n_check;
        if (t_k > t_prev) {
            if (open_system)
                rho = evolve_density(rho, hfn, t_prev, t_k, options.dt, cfg.gamma_dephasing);
            else
                psi = evolve(psi, hfn, t_prev, t_k, options.dt);
        }
        t_prev = t_k;

        tracked = detail::track_eigenstate(hfn(t_k), tracked);
        TrajectoryPoint pt;
        pt.t = t_k;
        pt.ratio = std::abs(ramp_value(schedule, t_k) * cfg.j_max) / cfg.b_x;
        if (open_system) {
            pt.p_uu = rho.spin_population(idx_uu);
            pt.p_dd = rho.spin_population(idx_dd);
            pt.eigenstate_overlap = (tracked.adjoint() * rho.entries * tracked)(0, 0).real();
        } else {
            pt.p_uu = psi.spin_population(idx_uu);
            pt.p_dd = psi.spin_population(idx_dd);
            const Complex ov = tracked.dot(psi.amplitudes);
            pt.eigenstate_overlap = std::norm(ov);
        }
        pt.p_mixed = std::max(0.0, 1.0 - pt.p_uu - pt.p_dd);
        result.trajectory.push_back(pt);
    }

    if (open_system)
        result.final_density = std::move(rho);
    else
        result.final_state = std::move(psi);
    result.adiabatic_warning = result.trajectory.back().eigenstate_overlap < 0.9;
    return result;
}

struct SpectrumResult {
    Eigen::VectorXd eigenvalues;  // ascending
    Matrix eigenvectors;          // columns, matching order
    double gap = 0.0;             // E1 - E0
};

inline SpectrumResult static_spectrum(int n_spins, double b_x, double j, double b_z,
                                      CouplingRange range, double field_sign = -1.0) {
    IsingConfig cfg;
    cfg.n_spins = n_spins;
    cfg.b_x = b_x;
    cfg.j_max = j;
    cfg.b_z_bias = b_z;
    cfg.coupling_range = range;
    cfg.field_sign = field_sign;
    cfg.validate_static();
    Eigen::SelfAdjointEigenSolver<Matrix> es(ising_hamiltonian(cfg, j));
    SpectrumResult r;
    r.eigenvalues = es.eigenvalues();
    r.eigenvectors = es.eigenvectors();
    r.gap = r.eigenvalues[1] - r.eigenvalues[0];
    return r;
}

// Exact diagonalization at a fixed coupling ratio. The gap between the two
// lowest eigenvalues is the tunnelling splitting of the (anti-)ferromagnetic
// manifold once |J| >> B_x.
inline SpectrumResult spectrum_and_gap(const IsingConfig& cfg, double j_over_bx) {
    cfg.validate_static();
    if (!(cfg.b_x > 0.0))
        throw std::invalid_argument("spectrum_and_gap: B_x must be > 0 to scale the ratio");
    return static_spectrum(cfg.n_spins, cfg.b_x, j_over_bx * cfg.b_x, cfg.b_z_bias,
                           cfg.coupling_range, cfg.field_sign);
}

}  // namespace qmagnet
