// Single-query unitaries, query sequences, and the four-query diagonalizing
// block with its closed-form polynomials.
#pragma once

#include <stdexcept>
#include <vector>

#include "hbcd/matrix.hpp"

namespace hbcd {

class PhaseSequence;  // protocols.hpp

inline double reduce_angle(double a) {
    constexpr double two_pi = 6.283185307179586476925287;
    double r = std::fmod(a, two_pi);
    if (r < 0.0) r += two_pi;
    return r;
}

struct QueryParams {
    double theta;  // channel angle, one of {0, alpha}
    double psi;    // controlled z-rotation phase on M
    double phi;    // x-rotation phase on M

    QueryParams(double theta_, double psi_, double phi_)
        : theta(reduce_angle(theta_)), psi(reduce_angle(psi_)), phi(reduce_angle(phi_)) {}
};

// Four-query block Q4 Q3 Q2 Q1 at the diagonalizing phase: both channel
// hypotheses become diagonal, the hidden-|1> sector of the theta=0 block
// carries phase 2*beta and the theta=alpha block acts as a z-phase beta on M.
struct FourQueryBlock {
    double alpha;
    Complex a_tilde;             // e^{i psi}, the unit-modulus root
    double beta;                 // effective rotation angle, in (-pi, pi]
    ComplexMatrix block_theta0;  // Q-check at theta = 0
    ComplexMatrix block_alpha;   // Q-check at theta = alpha
};

struct NoUnitRootError : std::domain_error {
    using std::domain_error::domain_error;
};

// Pauli / rotation building blocks (2x2).
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();
ComplexMatrix rot_x(double phi);   // e^{i phi sigma_x}
ComplexMatrix rot_z(double psi);   // e^{i psi sigma_z}

// C = e^{i theta sigma_x} on the hidden qubit.
ComplexMatrix channel_unitary(double theta);

// Full query: (I (x) e^{i phi sx}) . CR(psi) . (C(theta) (x) I), hidden-first
// basis. The controlled rotation fires on hidden |1>; this control value is
// the one that reproduces the four-query block polynomials (see the
// bootstrap test in tests/test_query.cpp) and is frozen here.
ComplexMatrix query_unitary(const QueryParams& p);

// Product Q_K ... Q_1 for a phase sequence at channel angle theta.
ComplexMatrix sequence_unitary(double theta, const PhaseSequence& seq);

// Raw four-query products (theta = 0, theta = alpha) at a given psi,
// phi_n = 0 throughout. No diagonality assumed.
std::pair<ComplexMatrix, ComplexMatrix> four_query_block(double alpha, double psi);

// Appendix-style closed-form polynomials of x = cos(theta), a = e^{i psi}.
Complex poly_p1(Complex x, Complex a);
Complex poly_p2(Complex x, Complex a);
Complex poly_p3(Complex x, Complex a);
Complex poly_p4(Complex x, Complex a);

// Finds the unit-modulus root of x^2 a^2 + 2(x^2 - 1) a + x^2 = 0 and the
// rotation angle beta with both four-query blocks diagonal. Root selection:
// the conjugate root pair yields +-beta; the root giving beta > 0 is chosen,
// matching the small-angle behavior beta ~ 2 alpha^2. Throws NoUnitRootError
// outside the region where a unit root exists (cos^2 alpha <= 1/2).
FourQueryBlock diagonalizing_psi(double alpha);

// Grid + golden-section fallback: minimizes the off-diagonal norm of the
// four-query block over psi directly. Used to cross-check the closed form.
double diagonalizing_psi_numeric(double alpha);

}  // namespace hbcd
