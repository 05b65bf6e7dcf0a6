#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "qmagnet/state.hpp"

namespace qmagnet {

enum class PauliAxis { X, Y, Z };

struct PauliFactor {
    int site;
    PauliAxis axis;
};

// coefficient (rad/s, hbar = 1) times a product of Paulis on distinct sites
struct OperatorTerm {
    double coefficient = 0.0;
    std::vector<PauliFactor> factors;
};

// Sum of Kronecker-embedded Pauli products, identity on the Fock factor.
// Each product maps a spin basis column to a single row with a phase, so the
// assembly is O(terms * dim) without forming explicit Kronecker factors.
inline Matrix build_many_body_operator(std::span<const OperatorTerm> terms,
                                       int n_spins, int fock_levels = 1) {
    const BasisShape shape{n_spins, fock_levels};
    shape.validate();
    const auto dim = static_cast<Eigen::Index>(shape.dim());
    Matrix op = Matrix::Zero(dim, dim);

    for (const OperatorTerm& term : terms) {
        std::vector<bool> seen(static_cast<std::size_t>(n_spins), false);
        for (const PauliFactor& f : term.factors) {
            if (f.site < 0 || f.site >= n_spins)
                throw std::out_of_range("build_many_body_operator: site index out of range");
            if (f.axis != PauliAxis::X && f.axis != PauliAxis::Y && f.axis != PauliAxis::Z)
                throw std::invalid_argument("build_many_body_operator: invalid axis");
            if (seen[static_cast<std::size_t>(f.site)])
                throw std::invalid_argument("build_many_body_operator: repeated site in term");
            seen[static_cast<std::size_t>(f.site)] = true;
        }

        for (std::size_t col = 0; col < shape.spin_dim(); ++col) {
            std::size_t row = col;
            Complex phase = term.coefficient;
            for (const PauliFactor& f : term.factors) {
                const int bit = spin_bit(row, f.site, n_spins);
                switch (f.axis) {
                    case PauliAxis::X:
                        row = flip_spin(row, f.site, n_spins);
                        break;
                    case PauliAxis::Y:
                        // sigma_y |up> = i |down>,  sigma_y |down> = -i |up>
                        phase *= bit == 0 ? Complex(0, 1) : Complex(0, -1);
                        row = flip_spin(row, f.site, n_spins);
                        break;
                    case PauliAxis::Z:
                        phase *= bit == 0 ? 1.0 : -1.0;
                        break;
                }
            }
            for (int f = 0; f < fock_levels; ++f)
                op(static_cast<Eigen::Index>(shape.index(row, f)),
                   static_cast<Eigen::Index>(shape.index(col, f))) += phase;
        }
    }
    return op;
}

inline Matrix build_many_body_operator(std::initializer_list<OperatorTerm> terms,
                                       int n_spins, int fock_levels = 1) {
    return build_many_body_operator(std::span<const OperatorTerm>(terms.begin(), terms.size()),
                                    n_spins, fock_levels);
}

}  // namespace qmagnet
