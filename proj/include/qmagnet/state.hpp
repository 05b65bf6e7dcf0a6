#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <utility>

#include "qmagnet/basis.hpp"

namespace qmagnet {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// Pure state over the spin x Fock product basis.
struct StateVector {
    BasisShape shape;
    Vector amplitudes;

    StateVector(BasisShape shape_, Vector amplitudes_)
        : shape(shape_), amplitudes(std::move(amplitudes_)) {
        shape.validate();
        if (static_cast<std::size_t>(amplitudes.size()) != shape.dim())
            throw std::invalid_argument("StateVector: amplitude count does not match basis shape");
    }

    static StateVector basis_state(BasisShape shape, std::size_t index) {
        shape.validate();
        if (index >= shape.dim())
            throw std::out_of_range("StateVector::basis_state: index out of range");
        Vector amps = Vector::Zero(static_cast<Eigen::Index>(shape.dim()));
        amps[static_cast<Eigen::Index>(index)] = 1.0;
        return StateVector(shape, std::move(amps));
    }

    double norm() const { return amplitudes.norm(); }

    Complex inner(const StateVector& other) const {
        if (shape != other.shape)
            throw std::invalid_argument("StateVector::inner: shape mismatch");
        return amplitudes.dot(other.amplitudes);  // conjugates *this
    }

    // probability of a spin configuration, summed over the Fock factor
    double spin_population(std::size_t spin_index) const {
        if (spin_index >= shape.spin_dim())
            throw std::out_of_range("StateVector::spin_population: index out of range");
        double p = 0.0;
        for (int f = 0; f < shape.fock_levels; ++f)
            p += std::norm(amplitudes[static_cast<Eigen::Index>(shape.index(spin_index, f))]);
        return p;
    }
};

// Hermitian density matrix over the same basis; carrier for dephasing runs.
struct DensityMatrix {
    BasisShape shape;
    Matrix entries;

    DensityMatrix(BasisShape shape_, Matrix entries_)
        : shape(shape_), entries(std::move(entries_)) {
        shape.validate();
        const auto d = static_cast<Eigen::Index>(shape.dim());
        if (entries.rows() != d || entries.cols() != d)
            throw std::invalid_argument("DensityMatrix: entry dimensions do not match basis shape");
    }

    static DensityMatrix from_pure(const StateVector& psi) {
        return DensityMatrix(psi.shape, psi.amplitudes * psi.amplitudes.adjoint());
    }

    double trace() const { return entries.trace().real(); }
    double purity() const { return (entries * entries).trace().real(); }
    double hermiticity_error() const {
        return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    }

    double spin_population(std::size_t spin_index) const {
        if (spin_index >= shape.spin_dim())
            throw std::out_of_range("DensityMatrix::spin_population: index out of range");
        double p = 0.0;
        for (int f = 0; f < shape.fock_levels; ++f) {
            const auto k = static_cast<Eigen::Index>(shape.index(spin_index, f));
            p += entries(k, k).real();
        }
        return p;
    }
};

}  // namespace qmagnet
