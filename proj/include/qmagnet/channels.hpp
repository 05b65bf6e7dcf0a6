#pragma once

#include <bit>
#include <vector>

#include "qmagnet/evolve.hpp"
#include "qmagnet/state.hpp"

namespace qmagnet {

// Per-spin sigma_z Lindblad dephasing, dL/dt = gamma sum_i (Z_i rho Z_i - rho).
// For this channel the finite-step map is exact: the coherence between spin
// configurations a and b decays as exp(-2 gamma dt * hamming(a, b)); diagonal
// entries (in the sigma_z product basis) are untouched.
inline Matrix dephase_map(const Matrix& entries, const BasisShape& shape,
                          double gamma, double dt) {
    const std::size_t sd = shape.spin_dim();
    Matrix out = entries;
    for (std::size_t sa = 0; sa < sd; ++sa) {
        for (std::size_t sb = 0; sb < sd; ++sb) {
            if (sa == sb) continue;
            const int differ = std::popcount(sa ^ sb);
            const double factor = std::exp(-2.0 * gamma * dt * differ);
            for (int fa = 0; fa < shape.fock_levels; ++fa)
                for (int fb = 0; fb < shape.fock_levels; ++fb)
                    out(static_cast<Eigen::Index>(shape.index(sa, fa)),
                        static_cast<Eigen::Index>(shape.index(sb, fb))) *= factor;
        }
    }
    return out;
}

inline DensityMatrix dephase_step(const DensityMatrix& rho, double gamma, double dt) {
    if (gamma < 0.0)
        throw std::invalid_argument("dephase_step: gamma must be >= 0");
    if (!(dt > 0.0))
        throw std::invalid_argument("dephase_step: dt must be positive");
    if (!(gamma * dt < 0.1))
        throw std::invalid_argument("dephase_step: step too large (gamma*dt must be < 0.1)");
    if (gamma == 0.0) return rho;
    return DensityMatrix(rho.shape, dephase_map(rho.entries, rho.shape, gamma, dt));
}

// Which part of the spin x Fock product to keep when tracing.
struct KeepSelector {
    std::vector<int> spin_sites;  // kept spin sites, any order, distinct
    bool keep_fock = false;

    static KeepSelector spins(std::vector<int> sites) { return {std::move(sites), false}; }
    static KeepSelector all_spins(int n_spins) {
        KeepSelector k;
        for (int i = 0; i < n_spins; ++i) k.spin_sites.push_back(i);
        return k;
    }
    static KeepSelector fock_only() { return {{}, true}; }
};

inline DensityMatrix partial_trace(const DensityMatrix& rho, const KeepSelector& keep) {
    const BasisShape& shape = rho.shape;
    std::vector<bool> kept(static_cast<std::size_t>(shape.n_spins), false);
    for (int site : keep.spin_sites) {
        if (site < 0 || site >= shape.n_spins)
            throw std::invalid_argument("partial_trace: selector site inconsistent with basis shape");
        if (kept[static_cast<std::size_t>(site)])
            throw std::invalid_argument("partial_trace: repeated site in selector");
        kept[static_cast<std::size_t>(site)] = true;
    }
    if (keep.spin_sites.empty() && !keep.keep_fock)
        throw std::invalid_argument("partial_trace: selector keeps nothing");

    // kept sites in ascending order define the output bit order
    std::vector<int> kept_sites, traced_sites;
    for (int i = 0; i < shape.n_spins; ++i)
        (kept[static_cast<std::size_t>(i)] ? kept_sites : traced_sites).push_back(i);

    const int n_kept = static_cast<int>(kept_sites.size());
    const int out_fock = keep.keep_fock ? shape.fock_levels : 1;
    const BasisShape out_shape{n_kept, out_fock};  // n_kept == 0 keeps the Fock factor alone
    const std::size_t kept_dim = std::size_t{1} << n_kept;
    const std::size_t traced_dim = std::size_t{1} << traced_sites.size();
    const std::size_t out_dim = kept_dim * static_cast<std::size_t>(out_fock);

    auto compose_spin = [&](std::size_t kept_bits, std::size_t traced_bits) {
        std::size_t full = 0;
        for (int k = 0; k < n_kept; ++k)
            if ((kept_bits >> (n_kept - 1 - k)) & 1u)
                full |= std::size_t{1} << (shape.n_spins - 1 - kept_sites[static_cast<std::size_t>(k)]);
        for (std::size_t k = 0; k < traced_sites.size(); ++k)
            if ((traced_bits >> (traced_sites.size() - 1 - k)) & 1u)
                full |= std::size_t{1} << (shape.n_spins - 1 - traced_sites[k]);
        return full;
    };

    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(out_dim),
                              static_cast<Eigen::Index>(out_dim));
    const int fock = shape.fock_levels;
    for (std::size_t ka = 0; ka < kept_dim; ++ka) {
        for (std::size_t kb = 0; kb < kept_dim; ++kb) {
            for (int fa = 0; fa < (keep.keep_fock ? fock : 1); ++fa) {
                for (int fb = 0; fb < (keep.keep_fock ? fock : 1); ++fb) {
                    Complex sum = 0.0;
                    for (std::size_t tr = 0; tr < traced_dim; ++tr) {
                        const std::size_t sa = compose_spin(ka, tr);
                        const std::size_t sb = compose_spin(kb, tr);
                        if (keep.keep_fock) {
                            sum += rho.entries(static_cast<Eigen::Index>(shape.index(sa, fa)),
                                               static_cast<Eigen::Index>(shape.index(sb, fb)));
                        } else {
                            for (int f = 0; f < fock; ++f)
                                sum += rho.entries(static_cast<Eigen::Index>(shape.index(sa, f)),
                                                   static_cast<Eigen::Index>(shape.index(sb, f)));
                        }
                    }
                    const std::size_t oa = ka * static_cast<std::size_t>(out_fock) +
                                           static_cast<std::size_t>(fa);
                    const std::size_t ob = kb * static_cast<std::size_t>(out_fock) +
                                           static_cast<std::size_t>(fb);
                    out(static_cast<Eigen::Index>(oa), static_cast<Eigen::Index>(ob)) = sum;
                }
            }
        }
    }
    return DensityMatrix(out_shape, std::move(out));
}

inline DensityMatrix partial_trace(const StateVector& psi, const KeepSelector& keep) {
    return partial_trace(DensityMatrix::from_pure(psi), keep);
}

}  // namespace qmagnet
