#include "hbcd/query.hpp"

#include <cmath>

#include "hbcd/protocols.hpp"

namespace hbcd {

namespace {
constexpr Complex kI{0.0, 1.0};
}

ComplexMatrix pauli_x() { return ComplexMatrix(2, {0, 1, 1, 0}); }
ComplexMatrix pauli_y() { return ComplexMatrix(2, {0, Complex{0, -1}, Complex{0, 1}, 0}); }
ComplexMatrix pauli_z() { return ComplexMatrix(2, {1, 0, 0, -1}); }

ComplexMatrix rot_x(double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    return ComplexMatrix(2, {Complex{c, 0}, Complex{0, s}, Complex{0, s}, Complex{c, 0}});
}

ComplexMatrix rot_z(double psi) {
    return ComplexMatrix(2, {std::polar(1.0, psi), 0, 0, std::polar(1.0, -psi)});
}

ComplexMatrix channel_unitary(double theta) {
    return rot_x(theta);
}

ComplexMatrix query_unitary(const QueryParams& p) {
    const double x = std::cos(p.theta), s = std::sin(p.theta);
    const Complex ep = std::polar(1.0, p.psi), em = std::polar(1.0, -p.psi);
    const double c = std::cos(p.phi), sn = std::sin(p.phi);

    // CR(psi) * (C(theta) (x) I): controlled phase fires on hidden |1>.
    ComplexMatrix m(4);
    m(0, 0) = x;        m(0, 2) = kI * s;
    m(1, 1) = x;        m(1, 3) = kI * s;
    m(2, 0) = ep * kI * s;  m(2, 2) = ep * x;
    m(3, 1) = em * kI * s;  m(3, 3) = em * x;

    // (I (x) e^{i phi sx}) on the measurement qubit.
    ComplexMatrix r(4);
    for (std::size_t h = 0; h < 2; ++h)
        for (std::size_t j = 0; j < 4; ++j) {
            r(2 * h + 0, j) = c * m(2 * h + 0, j) + kI * sn * m(2 * h + 1, j);
            r(2 * h + 1, j) = kI * sn * m(2 * h + 0, j) + c * m(2 * h + 1, j);
        }
    return r;
}

ComplexMatrix sequence_unitary(double theta, const PhaseSequence& seq) {
    ComplexMatrix u = ComplexMatrix::identity(4);
    for (std::size_t k = 0; k < seq.size(); ++k)
        u = query_unitary(QueryParams(theta, seq.psi_at(k), seq.phis()[k])) * u;
    return u;
}

std::pair<ComplexMatrix, ComplexMatrix> four_query_block(double alpha, double psi) {
    auto build = [&](double theta) {
        const ComplexMatrix q = query_unitary(QueryParams(theta, psi, 0.0));
        return q * q * q * q;
    };
    return {build(0.0), build(alpha)};
}

Complex poly_p1(Complex x, Complex a) {
    const Complex x2 = x * x, x4 = x2 * x2;
    return a * a - a * (1.0 + a) * (3.0 + a) * x2 + (1.0 + a) * (1.0 + a) * (1.0 + a) * x4;
}

Complex poly_p2(Complex x, Complex a) {
    const Complex x2 = x * x, x4 = x2 * x2;
    return (a - (1.0 + a) * (1.0 + 3.0 * a) * x2 +
            (1.0 + a) * (1.0 + a) * (1.0 + a) * x4) / (a * a * a);
}

Complex poly_p3(Complex x, Complex a) {
    const Complex x2 = x * x, x4 = x2 * x2;
    return a * (a - (1.0 + a) * (1.0 + 3.0 * a) * x2 +
                (1.0 + a) * (1.0 + a) * (1.0 + a) * x4);
}

Complex poly_p4(Complex x, Complex a) {
    return poly_p1(x, a) / (a * a * a * a);
}

namespace {

double offdiag_max(const ComplexMatrix& m) {
    double r = 0.0;
    for (std::size_t i = 0; i < m.dim(); ++i)
        for (std::size_t j = 0; j < m.dim(); ++j)
            if (i != j) r = std::max(r, std::abs(m(i, j)));
    return r;
}

FourQueryBlock assemble_block(double alpha, Complex a_tilde) {
    const double psi = reduce_angle(std::arg(a_tilde));
    auto [b0, ba] = four_query_block(alpha, psi);
    FourQueryBlock blk;
    blk.alpha = alpha;
    blk.a_tilde = std::polar(1.0, psi);
    blk.beta = std::arg(poly_p1(std::cos(alpha), blk.a_tilde));
    blk.block_theta0 = std::move(b0);
    blk.block_alpha = std::move(ba);
    return blk;
}

}  // namespace

FourQueryBlock diagonalizing_psi(double alpha) {
    const double x = std::cos(alpha);
    const double disc = 2.0 * x * x - 1.0;
    if (disc <= 1e-12)
        throw NoUnitRootError("diagonalizing_psi: no unit-modulus root (alpha outside D1 interior)");
    const double re = (1.0 - x * x) / (x * x);
    const double im = std::sqrt(disc) / (x * x);

    // Conjugate root pair -> rotation angles +-beta; take beta > 0.
    FourQueryBlock blk = assemble_block(alpha, Complex{re, im});
    if (blk.beta <= 0.0) blk = assemble_block(alpha, Complex{re, -im});

    const bool closed_form_ok =
        std::abs(std::abs(blk.a_tilde) - 1.0) < 1e-10 &&
        std::abs(std::abs(poly_p1(x, blk.a_tilde)) - 1.0) < 1e-9 &&
        offdiag_max(blk.block_theta0) < 1e-9 && offdiag_max(blk.block_alpha) < 1e-9;
    if (!closed_form_ok) {
        // Convention-independent fallback: locate the diagonalizing psi
        // numerically and rebuild.
        const double psi = diagonalizing_psi_numeric(alpha);
        blk = assemble_block(alpha, std::polar(1.0, psi));
        if (blk.beta < 0.0) blk = assemble_block(alpha, std::polar(1.0, -psi));
        if (offdiag_max(blk.block_theta0) >= 1e-9 || offdiag_max(blk.block_alpha) >= 1e-9)
            throw NoUnitRootError("diagonalizing_psi: numeric fallback failed to diagonalize");
    }
    if (std::abs(blk.beta) < 1e-12 || std::abs(std::abs(blk.beta) - 3.141592653589793238) < 1e-12)
        throw NoUnitRootError("diagonalizing_psi: degenerate rotation angle (no usable signal)");
    return blk;
}

double diagonalizing_psi_numeric(double alpha) {
    auto objective = [&](double psi) {
        auto [b0, ba] = four_query_block(alpha, psi);
        return offdiag_max(b0) + offdiag_max(ba);
    };
    constexpr double two_pi = 6.283185307179586476925287;
    const int grid = 10000;
    double best_psi = 0.0, best = 1e300;
    for (int i = 0; i < grid; ++i) {
        const double psi = two_pi * (i + 0.5) / grid;
        const double v = objective(psi);
        if (v < best) { best = v; best_psi = psi; }
    }
    // golden-section refinement around the best grid point
    const double gr = 0.61803398874989479;
    double a = best_psi - two_pi / grid, b = best_psi + two_pi / grid;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    for (int it = 0; it < 120; ++it) {
        if (objective(c) < objective(d)) b = d; else a = c;
        c = b - gr * (b - a);
        d = a + gr * (b - a);
    }
    return reduce_angle(0.5 * (a + b));
}

}  // namespace hbcd
