#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qmagnet/analysis.hpp"
#include "qmagnet/errors.hpp"
#include "qmagnet/rng.hpp"

namespace qmagnet {

// Fluorescence detection: a bright (spin-down) ion scatters mean_bright
// photons per window, a dark ion mean_dark. Counts are Poissonian.
struct DetectionModel {
    double mean_bright = 40.0;
    double mean_dark = 6.0;
    double window_s = 160e-6;  // documentation only
    int n_ions = 2;

    void validate() const {
        if (!(mean_bright > mean_dark) || !(mean_dark > 0.0))
            throw std::invalid_argument("DetectionModel: need mean_bright > mean_dark > 0");
        if (mean_bright * n_ions > 400.0)
            throw std::invalid_argument("DetectionModel: photon means out of supported range");
        if (n_ions != 2)
            throw std::invalid_argument("DetectionModel: n_ions must be 2");
    }

    double class_mean(int k_bright) const {
        if (k_bright < 0 || k_bright > n_ions)
            throw std::invalid_argument("DetectionModel: k_bright out of range");
        return k_bright * mean_bright + (n_ions - k_bright) * mean_dark;
    }

    // support capped at mean + 10 sqrt(mean) of the brightest class
    int support_cap() const {
        const double m = class_mean(n_ions);
        return static_cast<int>(std::ceil(m + 10.0 * std::sqrt(m)));
    }
};

struct PhotonHistogram {
    std::vector<long long> counts;  // index = photon number
    long long n_shots = 0;

    long long total() const {
        long long s = 0;
        for (long long c : counts) s += c;
        return s;
    }
};

// Poisson reference pmf for k_bright fluorescing ions, entries below 1e-12
// zeroed (truncation); the vector is sized to the model's support cap.
inline std::vector<double> reference_distribution(int k_bright, const DetectionModel& model,
                                                  int min_support = 0) {
    model.validate();
    const double mean = model.class_mean(k_bright);
    const int support = std::max(model.support_cap(), min_support);
    std::vector<double> pmf(static_cast<std::size_t>(support) + 1, 0.0);
    double p = std::exp(-mean);
    for (int k = 0; k <= support; ++k) {
        pmf[static_cast<std::size_t>(k)] = p < 1e-12 ? 0.0 : p;
        p *= mean / (k + 1);
    }
    return pmf;
}

// classes in (P_dd, P_uu, P_mixed) order: both bright / both dark / one bright
inline constexpr std::array<int, 3> kClassBrightCount = {2, 0, 1};

// One shot: draw the outcome class, then a Poisson photon count at the class
// mean. Each shot uses its own (seed, shot_index) stream so partial batches
// merge into exactly the serial result.
inline PhotonHistogram simulate_shots_range(const std::array<double, 3>& probs,
                                            const DetectionModel& model,
                                            long long first_shot, long long count,
                                            std::uint64_t seed) {
    model.validate();
    validate_probability_triple(probs);
    if (count < 0) throw std::invalid_argument("simulate_shots: negative shot count");
    PhotonHistogram hist;
    hist.counts.assign(static_cast<std::size_t>(model.support_cap()) + 1, 0);
    hist.n_shots = count;
    for (long long i = first_shot; i < first_shot + count; ++i) {
        SplitMix64 rng(seed_stream(seed, static_cast<std::uint64_t>(i)));
        const double u = rng.uniform();
        int cls = 2;
        if (u < probs[0]) cls = 0;
        else if (u < probs[0] + probs[1]) cls = 1;
        const double mean = model.class_mean(kClassBrightCount[static_cast<std::size_t>(cls)]);
        const int photons = std::min(poisson_sample(rng, mean),
                                     static_cast<int>(hist.counts.size()) - 1);
        ++hist.counts[static_cast<std::size_t>(photons)];
    }
    return hist;
}

inline PhotonHistogram simulate_shots(const std::array<double, 3>& probs,
                                      const DetectionModel& model, long long n_shots,
                                      std::uint64_t seed) {
    return simulate_shots_range(probs, model, 0, n_shots, seed);
}

struct PopulationEstimate {
    double p_dd = 0.0, p_uu = 0.0, p_mixed = 0.0;
    double se_dd = 0.0, se_uu = 0.0, se_mixed = 0.0;
    double loglik = 0.0;
    long long n_shots = 0;
    int iterations = 0;
    bool converged = false;

    std::array<double, 3> probs() const { return {p_dd, p_uu, p_mixed}; }
};

// Maximum-likelihood mixture weights over the three reference distributions,
// via EM (multiplicative updates on the simplex; monotone in the likelihood).
// Standard errors come from the observed information of the two free weights.
inline PopulationEstimate fit_populations(const PhotonHistogram& hist,
                                          const DetectionModel& model) {
    model.validate();
    if (hist.n_shots < 100)
        throw std::invalid_argument("fit_populations: need at least 100 shots");
    if (hist.total() != hist.n_shots)
        throw std::invalid_argument("fit_populations: histogram counts do not sum to n_shots");

    const int support = static_cast<int>(hist.counts.size()) - 1;
    const std::array<std::vector<double>, 3> refs = {
        reference_distribution(kClassBrightCount[0], model, support),
        reference_distribution(kClassBrightCount[1], model, support),
        reference_distribution(kClassBrightCount[2], model, support)};

    std::array<double, 3> w = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    const double n = static_cast<double>(hist.n_shots);
    constexpr int kMaxIterations = 100000;
    constexpr double kTolerance = 1e-10;
    constexpr double kFloor = 1e-300;

    auto log_likelihood = [&](const std::array<double, 3>& weights) {
        double ll = 0.0;
        for (std::size_t j = 0; j < hist.counts.size(); ++j) {
            if (hist.counts[j] == 0) continue;
            double pj = 0.0;
            for (int k = 0; k < 3; ++k)
                pj += weights[static_cast<std::size_t>(k)] * refs[static_cast<std::size_t>(k)][j];
            ll += static_cast<double>(hist.counts[j]) * std::log(std::max(pj, kFloor));
        }
        return ll;
    };

    double ll_prev = log_likelihood(w);
    int iter = 0;
    bool converged = false;
    for (; iter < kMaxIterations; ++iter) {
        std::array<double, 3> resp = {0.0, 0.0, 0.0};
        for (std::size_t j = 0; j < hist.counts.size(); ++j) {
            if (hist.counts[j] == 0) continue;
            double pj = 0.0;
            for (int k = 0; k < 3; ++k)
                pj += w[static_cast<std::size_t>(k)] * refs[static_cast<std::size_t>(k)][j];
            pj = std::max(pj, kFloor);
            for (int k = 0; k < 3; ++k)
                resp[static_cast<std::size_t>(k)] += static_cast<double>(hist.counts[j]) *
                    w[static_cast<std::size_t>(k)] * refs[static_cast<std::size_t>(k)][j] / pj;
        }
        for (int k = 0; k < 3; ++k) w[static_cast<std::size_t>(k)] = resp[static_cast<std::size_t>(k)] / n;
        const double ll = log_likelihood(w);
        if (ll - ll_prev < kTolerance && ll >= ll_prev - kTolerance) {
            ll_prev = ll;
            converged = true;
            break;
        }
        ll_prev = ll;
    }
    if (!converged)
        throw FitConvergenceError("fit_populations: EM did not converge within " +
                                  std::to_string(kMaxIterations) + " iterations (loglik " +
                                  std::to_string(ll_prev) + ")");

    // observed information for (w_dd, w_uu); w_mixed = 1 - w_dd - w_uu
    double i11 = 0.0, i12 = 0.0, i22 = 0.0;
    for (std::size_t j = 0; j < hist.counts.size(); ++j) {
        if (hist.counts[j] == 0) continue;
        double pj = 0.0;
        for (int k = 0; k < 3; ++k)
            pj += w[static_cast<std::size_t>(k)] * refs[static_cast<std::size_t>(k)][j];
        pj = std::max(pj, kFloor);
        const double d1 = refs[0][j] - refs[2][j];
        const double d2 = refs[1][j] - refs[2][j];
        const double c = static_cast<double>(hist.counts[j]) / (pj * pj);
        i11 += c * d1 * d1;
        i12 += c * d1 * d2;
        i22 += c * d2 * d2;
    }
    const double det = i11 * i22 - i12 * i12;
    double var1 = 1.0, var2 = 1.0, cov = 0.0;  // wide errors for degenerate data
    if (det > 1e-12 && i11 > 0.0 && i22 > 0.0) {
        var1 = i22 / det;
        var2 = i11 / det;
        cov = -i12 / det;
    }

    PopulationEstimate est;
    est.p_dd = w[0];
    est.p_uu = w[1];
    est.p_mixed = std::max(0.0, 1.0 - w[0] - w[1]);
    est.se_dd = std::sqrt(std::max(var1, 0.0));
    est.se_uu = std::sqrt(std::max(var2, 0.0));
    est.se_mixed = std::sqrt(std::max(var1 + var2 + 2.0 * cov, 0.0));
    est.loglik = ll_prev;
    est.n_shots = hist.n_shots;
    est.iterations = iter + 1;
    est.converged = converged;
    return est;
}

}  // namespace qmagnet
