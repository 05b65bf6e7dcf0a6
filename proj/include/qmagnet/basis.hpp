#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qmagnet {

// Product basis spin x Fock. Conventions (documented and tested):
//   - spin site 0 is the most significant bit of the spin index,
//   - |up> precedes |down>  (bit 0 = up, bit 1 = down),
//   - the Fock index is the least significant factor:
//       index = spin_index * fock_levels + fock_index.
struct BasisShape {
    int n_spins = 1;
    int fock_levels = 1;

    void validate() const {
        if (n_spins < 0 || n_spins > 24)
            throw std::invalid_argument("BasisShape: n_spins out of range");
        if (fock_levels < 1)
            throw std::invalid_argument("BasisShape: fock_levels must be >= 1");
    }

    std::size_t spin_dim() const { return std::size_t{1} << n_spins; }
    std::size_t dim() const { return spin_dim() * static_cast<std::size_t>(fock_levels); }

    std::size_t index(std::size_t spin_index, std::size_t fock_index) const {
        return spin_index * static_cast<std::size_t>(fock_levels) + fock_index;
    }
    std::size_t spin_of(std::size_t index) const {
        return index / static_cast<std::size_t>(fock_levels);
    }
    std::size_t fock_of(std::size_t index) const {
        return index % static_cast<std::size_t>(fock_levels);
    }

    bool operator==(const BasisShape&) const = default;
};

// bit of `site` within a spin configuration; 0 = up, 1 = down
inline int spin_bit(std::size_t spin_index, int site, int n_spins) {
    return static_cast<int>((spin_index >> (n_spins - 1 - site)) & 1u);
}

inline std::size_t flip_spin(std::size_t spin_index, int site, int n_spins) {
    return spin_index ^ (std::size_t{1} << (n_spins - 1 - site));
}

inline std::size_t spin_index_all_up(int) { return 0; }
inline std::size_t spin_index_all_down(int n_spins) {
    return (std::size_t{1} << n_spins) - 1;
}

// "uudd"-style label, site 0 first
inline std::string spin_label(std::size_t spin_index, int n_spins) {
    std::string s;
    for (int i = 0; i < n_spins; ++i)
        s += spin_bit(spin_index, i, n_spins) ? 'd' : 'u';
    return s;
}

}  // namespace qmagnet
