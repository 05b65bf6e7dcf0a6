#pragma once

#include <cmath>
#include <stdexcept>

namespace qmagnet {

// Time profile of the coupling as a fraction of J_max: linear up to
// t_linear_end, then c (e^{alpha t} - beta)^2 with c fixed so the value at
// t_total is exactly 1. alpha carries units 1/us; times are seconds.
struct RampSchedule {
    double t_total = 125e-6;
    double t_linear_end = 50e-6;
    double linear_end_fraction = 5e-4;
    double alpha_per_us = 0.026;
    double beta = 4.0;
    int n_steps = 50;

    void validate() const {
        if (!(t_total > 0.0) || !(t_linear_end > 0.0) || t_linear_end > t_total)
            throw std::invalid_argument("RampSchedule: need 0 < t_linear_end <= t_total");
        if (!(linear_end_fraction >= 0.0) || linear_end_fraction > 1.0)
            throw std::invalid_argument("RampSchedule: linear_end_fraction out of [0, 1]");
        if (!(alpha_per_us > 0.0))
            throw std::invalid_argument("RampSchedule: alpha must be positive");
        if (n_steps < 1)
            throw std::invalid_argument("RampSchedule: n_steps must be >= 1");
        if (!(std::exp(alpha_per_us * t_total * 1e6) > beta))
            throw std::invalid_argument("RampSchedule: exp(alpha*T) must exceed beta");
    }

    static RampSchedule paper_default() { return RampSchedule{}; }

    // Same shape in normalized time, slowed by `factor`.
    RampSchedule stretched(double factor) const {
        if (!(factor > 0.0))
            throw std::invalid_argument("RampSchedule::stretched: factor must be positive");
        RampSchedule s = *this;
        s.t_total *= factor;
        s.t_linear_end *= factor;
        s.alpha_per_us /= factor;
        return s;
    }
};

// Fraction of J_max at time t. The two segments are kept exactly as stated
// (the exponential branch starts below the linear endpoint); the mismatch is
// below 1e-3 of J_max and confined to t in [t_linear_end, ln(beta)/alpha].
inline double ramp_value(const RampSchedule& s, double t) {
    s.validate();
    if (t < 0.0 || t > s.t_total * (1.0 + 1e-12))
        throw std::invalid_argument("ramp_value: t outside [0, t_total]");
    if (t <= s.t_linear_end)
        return s.linear_end_fraction * (t / s.t_linear_end);
    const double num = std::exp(s.alpha_per_us * t * 1e6) - s.beta;
    const double den = std::exp(s.alpha_per_us * s.t_total * 1e6) - s.beta;
    return (num / den) * (num / den);
}

// Earliest time at which the ramp reaches `fraction`; inverse of ramp_value
// on the segment that owns the fraction (linear for f <= linear_end_fraction,
// otherwise the increasing branch of the exponential segment).
inline double ramp_time_for_fraction(const RampSchedule& s, double fraction) {
    s.validate();
    if (fraction < 0.0 || fraction > 1.0 + 1e-12)
        throw std::invalid_argument("ramp_time_for_fraction: fraction outside [0, 1]");
    if (fraction <= s.linear_end_fraction)
        return s.t_linear_end * (fraction / s.linear_end_fraction);
    const double den = std::exp(s.alpha_per_us * s.t_total * 1e6) - s.beta;
    const double t_us = std::log(s.beta + std::sqrt(fraction) * den) / s.alpha_per_us;
    return std::min(t_us * 1e-6, s.t_total);
}

}  // namespace qmagnet
