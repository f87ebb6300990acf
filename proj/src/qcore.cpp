#include "hbcd/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hbcd {

DensityMatrix DensityMatrix::checked(ComplexMatrix m) {
    if (max_abs_diff(m, m.adjoint()) >= 1e-12)
        throw std::invalid_argument("DensityMatrix: not Hermitian");
    if (std::abs(m.trace() - Complex{1.0, 0.0}) >= 1e-12)
        throw std::invalid_argument("DensityMatrix: trace != 1");
    auto eigs = hermitian_eigenvalues(m);
    if (eigs.front() <= -1e-10)
        throw std::invalid_argument("DensityMatrix: negative eigenvalue");
    return DensityMatrix{std::move(m)};
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
    ComplexMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0 / static_cast<double>(dim);
    return DensityMatrix{std::move(m)};
}

DensityMatrix DensityMatrix::pure(const std::vector<Complex>& state) {
    double norm2 = 0.0;
    for (const auto& c : state) norm2 += std::norm(c);
    if (norm2 <= 0.0) throw std::invalid_argument("DensityMatrix::pure: zero vector");
    ComplexMatrix m(state.size());
    for (std::size_t i = 0; i < state.size(); ++i)
        for (std::size_t j = 0; j < state.size(); ++j)
            m(i, j) = state[i] * std::conj(state[j]) / norm2;
    return DensityMatrix{std::move(m)};
}

namespace detail {

ComplexMatrix kron_any(const ComplexMatrix& a, const ComplexMatrix& b) {
    const std::size_t na = a.dim(), nb = b.dim();
    ComplexMatrix r(na * nb);
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < na; ++j) {
            const Complex aij = a(i, j);
            if (aij == Complex{0.0, 0.0}) continue;
            for (std::size_t k = 0; k < nb; ++k)
                for (std::size_t l = 0; l < nb; ++l)
                    r(i * nb + k, j * nb + l) = aij * b(k, l);
        }
    return r;
}

}  // namespace detail

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.dim() * b.dim() > 4)
        throw std::invalid_argument("kron: result dimension exceeds the two-qubit cap");
    return detail::kron_any(a, b);
}

DensityMatrix evolve(const ComplexMatrix& u, const DensityMatrix& rho) {
    if (u.dim() != rho.dim())
        throw std::invalid_argument("evolve: dimension mismatch");
    return DensityMatrix{u * rho.mat * u.adjoint()};
}

DensityMatrix partial_trace_hidden(const DensityMatrix& rho4) {
    if (rho4.dim() != 4)
        throw std::invalid_argument("partial_trace_hidden: expected dim 4");
    ComplexMatrix r(2);
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t l = 0; l < 2; ++l)
            r(k, l) = rho4.mat(0 * 2 + k, 0 * 2 + l) + rho4.mat(1 * 2 + k, 1 * 2 + l);
    return DensityMatrix{std::move(r)};
}

namespace {

// One cyclic sweep set of complex Jacobi rotations. Rotations are
// accumulated into v when it is non-null.
void jacobi_hermitian(ComplexMatrix& h, ComplexMatrix* v) {
    const std::size_t n = h.dim();
    if (v) *v = ComplexMatrix::identity(n);
    if (n < 2) return;
    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += std::norm(h(p, q));
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const Complex hpq = h(p, q);
                const double apq = std::abs(hpq);
                if (apq < 1e-300) continue;
                const double app = h(p, p).real();
                const double aqq = h(q, q).real();
                // Diagonalize the 2x2 block [[app, hpq], [conj(hpq), aqq]].
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const Complex phase = hpq / apq;
                const Complex spq = s * phase;  // rotation: p' = c p - conj(spq) q is folded below
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex hkp = h(k, p), hkq = h(k, q);
                    h(k, p) = c * hkp - std::conj(spq) * hkq;
                    h(k, q) = spq * hkp + c * hkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex hpk = h(p, k), hqk = h(q, k);
                    h(p, k) = c * hpk - spq * hqk;
                    h(q, k) = std::conj(spq) * hpk + c * hqk;
                }
                if (v) {
                    for (std::size_t k = 0; k < n; ++k) {
                        const Complex vkp = (*v)(k, p), vkq = (*v)(k, q);
                        (*v)(k, p) = c * vkp - std::conj(spq) * vkq;
                        (*v)(k, q) = spq * vkp + c * vkq;
                    }
                }
            }
        }
    }
}

void sort_eigensystem(std::vector<double>& eigs, ComplexMatrix* v) {
    const std::size_t n = eigs.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return eigs[a] < eigs[b]; });
    std::vector<double> se(n);
    for (std::size_t i = 0; i < n; ++i) se[i] = eigs[idx[i]];
    eigs = std::move(se);
    if (v) {
        ComplexMatrix sv(n);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) sv(i, j) = (*v)(i, idx[j]);
        *v = std::move(sv);
    }
}

}  // namespace

std::vector<double> hermitian_eigensystem(const ComplexMatrix& h, ComplexMatrix& vecs) {
    const std::size_t n = h.dim();
    if (n == 1) {
        vecs = ComplexMatrix::identity(1);
        return {h(0, 0).real()};
    }
    if (n == 2) {
        // Closed form for the 2x2 Hermitian block.
        const double a = h(0, 0).real(), d = h(1, 1).real();
        const Complex b = h(0, 1);
        const double ab = std::abs(b);
        const double mean = 0.5 * (a + d);
        const double r = std::sqrt(0.25 * (a - d) * (a - d) + ab * ab);
        std::vector<double> eigs{mean - r, mean + r};
        vecs = ComplexMatrix::identity(2);
        if (ab > 1e-300 || std::abs(a - d) > 1e-300) {
            // eigenvector for mean - r
            const double lam = eigs[0];
            Complex v0, v1;
            if (ab > 1e-300) {
                v0 = b;
                v1 = Complex{lam - a, 0.0};
            } else {
                v0 = (a <= d) ? Complex{1.0, 0.0} : Complex{0.0, 0.0};
                v1 = (a <= d) ? Complex{0.0, 0.0} : Complex{1.0, 0.0};
            }
            const double nn = std::sqrt(std::norm(v0) + std::norm(v1));
            if (nn > 0) {
                v0 /= nn; v1 /= nn;
                vecs(0, 0) = v0; vecs(1, 0) = v1;
                vecs(0, 1) = -std::conj(v1); vecs(1, 1) = std::conj(v0);
            }
        }
        return eigs;
    }
    ComplexMatrix work = h;
    jacobi_hermitian(work, &vecs);
    std::vector<double> eigs(n);
    for (std::size_t i = 0; i < n; ++i) eigs[i] = work(i, i).real();
    sort_eigensystem(eigs, &vecs);
    return eigs;
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h) {
    if (h.dim() == 2) {
        const double a = h(0, 0).real(), d = h(1, 1).real();
        const double ab = std::abs(h(0, 1));
        const double mean = 0.5 * (a + d);
        const double r = std::sqrt(0.25 * (a - d) * (a - d) + ab * ab);
        return {mean - r, mean + r};
    }
    ComplexMatrix work = h;
    jacobi_hermitian(work, nullptr);
    std::vector<double> eigs(h.dim());
    for (std::size_t i = 0; i < h.dim(); ++i) eigs[i] = work(i, i).real();
    std::sort(eigs.begin(), eigs.end());
    return eigs;
}

double spectral_norm(const ComplexMatrix& a) {
    const ComplexMatrix g = a.adjoint() * a;
    const auto eigs = hermitian_eigenvalues(g);
    return std::sqrt(std::max(0.0, eigs.back()));
}

std::vector<double> unitary_eigenphases(const ComplexMatrix& u) {
    if (!is_unitary(u, 1e-9))
        throw std::invalid_argument("unitary_eigenphases: input not unitary");
    const std::size_t n = u.dim();
    const ComplexMatrix ud = u.adjoint();
    ComplexMatrix hr(n), hi(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            hr(i, j) = 0.5 * (u(i, j) + ud(i, j));
            hi(i, j) = Complex{0.0, -0.5} * (u(i, j) - ud(i, j));
        }
    // u is normal, so hr and hi commute; a generic real combination has the
    // common eigenvectors, with a retry in case of an eigenvalue collision.
    double kappa = 0.61803398874989479;
    for (int attempt = 0; attempt < 8; ++attempt) {
        ComplexMatrix mix(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) mix(i, j) = hr(i, j) + kappa * hi(i, j);
        ComplexMatrix vecs(n);
        hermitian_eigensystem(mix, vecs);
        std::vector<double> phases(n);
        bool ok = true;
        for (std::size_t k = 0; k < n && ok; ++k) {
            std::vector<Complex> v(n);
            for (std::size_t i = 0; i < n; ++i) v[i] = vecs(i, k);
            const auto uv = u.apply(v);
            Complex lambda{0.0, 0.0};
            for (std::size_t i = 0; i < n; ++i) lambda += std::conj(v[i]) * uv[i];
            double resid = 0.0;
            for (std::size_t i = 0; i < n; ++i) resid += std::norm(uv[i] - lambda * v[i]);
            if (std::sqrt(resid) > 1e-7) ok = false;
            phases[k] = std::arg(lambda);
        }
        if (ok) {
            std::sort(phases.begin(), phases.end());
            return phases;
        }
        kappa = 0.5 * kappa + 0.1711 * (attempt + 1);
    }
    throw std::runtime_error("unitary_eigenphases: eigenvector extraction failed");
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    const auto eigs = hermitian_eigenvalues(a - b);
    double s = 0.0;
    for (double e : eigs) s += std::abs(e);
    return 0.5 * s;
}

}  // namespace hbcd
