#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>

#include "qmagnet/errors.hpp"
#include "qmagnet/state.hpp"

namespace qmagnet {

using HamiltonianFn = std::function<Matrix(double)>;

namespace detail {

inline constexpr double kHermiticityTol = 1e-8;

// exp(-i H dt) through the eigendecomposition; exactly unitary per step
inline Matrix step_propagator(const Matrix& hamiltonian, double dt) {
    const double asym = (hamiltonian - hamiltonian.adjoint()).cwiseAbs().maxCoeff();
    if (asym > kHermiticityTol)
        throw NumericalError("evolve: non-Hermitian Hamiltonian sample (asymmetry " +
                             std::to_string(asym) + ")");
    Eigen::SelfAdjointEigenSolver<Matrix> es(hamiltonian);
    const Eigen::VectorXd& w = es.eigenvalues();
    Vector phases(w.size());
    for (Eigen::Index k = 0; k < w.size(); ++k)
        phases[k] = std::polar(1.0, -w[k] * dt);
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

// Piecewise-constant propagation of a set of column states, the Hamiltonian
// sampled at the midpoint of each step (second-order accurate in dt).
inline Matrix evolve_columns(Matrix columns, const HamiltonianFn& hamiltonian_fn,
                             double t0, double t1, double dt) {
    if (!(dt > 0.0))
        throw std::invalid_argument("evolve: dt must be positive");
    if (t1 < t0)
        throw std::invalid_argument("evolve: t1 must be >= t0");
    double t = t0;
    while (t < t1 - 1e-18) {
        const double step = std::min(dt, t1 - t);
        columns = detail::step_propagator(hamiltonian_fn(t + 0.5 * step), step) * columns;
        t += step;
    }
    return columns;
}

inline StateVector evolve(const StateVector& state, const HamiltonianFn& hamiltonian_fn,
                          double t0, double t1, double dt) {
    return StateVector(state.shape,
                       evolve_columns(state.amplitudes, hamiltonian_fn, t0, t1, dt));
}

// Unitary split-step for open-system runs: U rho U^dag each step, followed by
// the exact per-step dephasing map when gamma > 0 (see channels.hpp).
Matrix dephase_map(const Matrix& entries, const BasisShape& shape, double gamma, double dt);

inline DensityMatrix evolve_density(const DensityMatrix& rho, const HamiltonianFn& hamiltonian_fn,
                                    double t0, double t1, double dt, double gamma = 0.0) {
    if (!(dt > 0.0))
        throw std::invalid_argument("evolve: dt must be positive");
    if (gamma < 0.0)
        throw std::invalid_argument("evolve: gamma must be >= 0");
    Matrix entries = rho.entries;
    double t = t0;
    while (t < t1 - 1e-18) {
        const double step = std::min(dt, t1 - t);
        const Matrix u = detail::step_propagator(hamiltonian_fn(t + 0.5 * step), step);
        entries = u * entries * u.adjoint();
        if (gamma > 0.0) entries = dephase_map(entries, rho.shape, gamma, step);
        t += step;
    }
    return DensityMatrix(rho.shape, std::move(entries));
}

}  // namespace qmagnet
