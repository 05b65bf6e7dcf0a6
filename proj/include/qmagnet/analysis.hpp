#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "qmagnet/ising.hpp"
#include "qmagnet/state.hpp"

namespace qmagnet {

// probs = (P_dd, P_uu, P_mixed)
inline void validate_probability_triple(const std::array<double, 3>& probs) {
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= -1e-9) || !(p <= 1.0 + 1e-9))
            throw std::invalid_argument("probability triple: component outside [0, 1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("probability triple: components must sum to 1");
}

// quantum magnetization M = P_dd + P_uu
inline double magnetization(const std::array<double, 3>& probs) {
    validate_probability_triple(probs);
    return probs[0] + probs[1];
}

struct ParityScan {
    std::vector<double> phi_values;     // radians
    std::vector<double> parity_values;  // in [-1, 1]
};

inline std::vector<double> default_phase_grid(int n_points = 24) {
    std::vector<double> phis(static_cast<std::size_t>(n_points));
    for (int k = 0; k < n_points; ++k)
        phis[static_cast<std::size_t>(k)] = 2.0 * std::numbers::pi * k / n_points;
    return phis;
}

namespace detail {

// Analysis pulse for scan phase phi. The phase origin is fixed so that the
// phi = 0 pulse inverts the pi/2 preparation pulse (axis offset +pi/2); with
// this reference the ferromagnetic pipeline oscillates as +C cos(2 phi).
inline RotationPulse parity_pulse(double phi) {
    return {std::numbers::pi / 2, phi + std::numbers::pi / 2};
}

inline double parity_from_populations(double p_uu, double p_dd, double p_mixed) {
    return p_dd + p_uu - p_mixed;
}

}  // namespace detail

inline ParityScan parity_scan(const StateVector& state, std::span<const double> phi_values) {
    if (state.shape.n_spins != 2 || state.shape.fock_levels != 1)
        throw std::invalid_argument("parity_scan: expects a bare 2-spin state");
    ParityScan scan;
    for (double phi : phi_values) {
        const StateVector rotated = rotate(state, detail::parity_pulse(phi));
        const double p_uu = rotated.spin_population(0);
        const double p_dd = rotated.spin_population(3);
        scan.phi_values.push_back(phi);
        scan.parity_values.push_back(
            detail::parity_from_populations(p_uu, p_dd, 1.0 - p_uu - p_dd));
    }
    return scan;
}

inline ParityScan parity_scan(const DensityMatrix& rho, std::span<const double> phi_values) {
    if (rho.shape.n_spins != 2 || rho.shape.fock_levels != 1)
        throw std::invalid_argument("parity_scan: expects a bare 2-spin state");
    ParityScan scan;
    for (double phi : phi_values) {
        const DensityMatrix rotated = rotate(rho, detail::parity_pulse(phi));
        const double p_uu = rotated.spin_population(0);
        const double p_dd = rotated.spin_population(3);
        scan.phi_values.push_back(phi);
        scan.parity_values.push_back(
            detail::parity_from_populations(p_uu, p_dd, 1.0 - p_uu - p_dd));
    }
    return scan;
}

struct ContrastFit {
    double c = 0.0;       // signed when the sine component is consistent with 0
    double stderr_c = 0.0;
    double a_cos = 0.0;
    double b_sin = 0.0;
    double offset = 0.0;
};

// Least squares of parity(phi) = A cos(2 phi) + B sin(2 phi) + offset.
// C = hypot(A, B), carrying the sign of A when |B| is within its standard
// error (phase-locked scan); otherwise the magnitude is reported.
inline ContrastFit fit_contrast(const ParityScan& scan) {
    const std::size_t n = scan.phi_values.size();
    if (n != scan.parity_values.size())
        throw std::invalid_argument("fit_contrast: phi/parity length mismatch");
    if (n < 8)
        throw std::invalid_argument("fit_contrast: need at least 8 phase points");
    double phi_min = scan.phi_values[0], phi_max = scan.phi_values[0];
    for (double p : scan.phi_values) {
        phi_min = std::min(phi_min, p);
        phi_max = std::max(phi_max, p);
    }
    if (phi_max - phi_min < std::numbers::pi * (1.0 - 1e-9))
        throw std::invalid_argument("fit_contrast: phase grid must span a full period of 2*phi");

    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), 3);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        const auto r = static_cast<Eigen::Index>(k);
        design(r, 0) = std::cos(2.0 * scan.phi_values[k]);
        design(r, 1) = std::sin(2.0 * scan.phi_values[k]);
        design(r, 2) = 1.0;
        y[r] = scan.parity_values[k];
    }
    const Eigen::MatrixXd gram = design.transpose() * design;
    if (std::abs(gram.determinant()) < 1e-9)
        throw std::invalid_argument("fit_contrast: degenerate phase grid");
    const Eigen::MatrixXd gram_inv = gram.inverse();
    const Eigen::Vector3d coef = gram_inv * (design.transpose() * y);

    const double rss = (y - design * coef).squaredNorm();
    const double sigma2 = n > 3 ? rss / static_cast<double>(n - 3) : 0.0;
    const double se_a = std::sqrt(std::max(0.0, sigma2 * gram_inv(0, 0)));
    const double se_b = std::sqrt(std::max(0.0, sigma2 * gram_inv(1, 1)));

    ContrastFit fit;
    fit.a_cos = coef[0];
    fit.b_sin = coef[1];
    fit.offset = coef[2];
    const double mag = std::hypot(coef[0], coef[1]);
    const bool phase_locked = std::abs(coef[1]) <= std::max(se_b, 1e-12);
    fit.c = phase_locked && coef[0] < 0.0 ? -mag : mag;
    if (mag > 1e-12)
        fit.stderr_c = std::sqrt(coef[0] * coef[0] * se_a * se_a +
                                 coef[1] * coef[1] * se_b * se_b) / mag;
    else
        fit.stderr_c = std::max(se_a, se_b);
    return fit;
}

enum class Branch { Ferro, Antiferro };

// Lower bound on the overlap with the branch's Bell target:
// F = population/2 + C/2, population = P_dd + P_uu (ferro) or P_ud + P_du
// (antiferro, after the R(pi/2, 0) mapping pulse).
inline double fidelity_bound(double population_sum, double contrast, Branch /*branch*/) {
    if (!(population_sum >= -1e-12) || !(population_sum <= 1.0 + 1e-12))
        throw std::invalid_argument("fidelity_bound: population outside [0, 1]");
    if (!(contrast >= -1.0 - 1e-12) || !(contrast <= 1.0 + 1e-12))
        throw std::invalid_argument("fidelity_bound: contrast outside [-1, 1]");
    return 0.5 * population_sum + 0.5 * contrast;
}

}  // namespace qmagnet
