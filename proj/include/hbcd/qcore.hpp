// Exact dense operations on 2- and 4-dimensional state spaces:
// tensor products, unitary conjugation, partial trace, spectral norm,
// and the Hermitian eigensolver backing them.
#pragma once

#include <optional>
#include <vector>

#include "hbcd/matrix.hpp"

namespace hbcd {

// Density operator: Hermitian, unit trace, positive semidefinite.
struct DensityMatrix {
    ComplexMatrix mat;

    std::size_t dim() const { return mat.dim(); }

    // Validates the structural invariants; throws std::invalid_argument.
    static DensityMatrix checked(ComplexMatrix m);

    static DensityMatrix maximally_mixed(std::size_t dim);
    static DensityMatrix pure(const std::vector<Complex>& state);
};

// Kronecker product. Result dimension capped at 4: the dense protocol
// state space is two qubits; larger registers go through the dedicated
// multi-qubit path in protocols.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// U rho U^dagger.
DensityMatrix evolve(const ComplexMatrix& u, const DensityMatrix& rho);

// Reduced state of the measurement qubit. Basis ordering is hidden-first:
// |00>,|01>,|10>,|11> with the first index the hidden qubit.
DensityMatrix partial_trace_hidden(const DensityMatrix& rho4);

// Largest singular value.
double spectral_norm(const ComplexMatrix& a);

// Eigenvalues of a Hermitian matrix, ascending. Closed form for dim 2,
// cyclic complex Jacobi for larger dims.
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h);

// Full Hermitian eigendecomposition; eigenvectors_out columns match the
// ascending eigenvalue order.
std::vector<double> hermitian_eigensystem(const ComplexMatrix& h,
                                          ComplexMatrix& eigenvectors_out);

// Eigenphases of a unitary matrix, each in (-pi, pi].
std::vector<double> unitary_eigenphases(const ComplexMatrix& u);

// (1/2) * trace norm of (a - b) for Hermitian a, b.
double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

namespace detail {
// Uncapped Kronecker product used by the multi-qubit parallel check.
ComplexMatrix kron_any(const ComplexMatrix& a, const ComplexMatrix& b);
}  // namespace detail

}  // namespace hbcd
