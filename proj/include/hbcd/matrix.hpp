// Dense complex square matrices for small state spaces.
#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace hbcd {

using Complex = std::complex<double>;

// Square complex matrix with runtime dimension. Row-major storage.
class ComplexMatrix {
public:
    ComplexMatrix() = default;

    explicit ComplexMatrix(std::size_t dim)
        : dim_(dim), a_(dim * dim, Complex{0.0, 0.0}) {}

    ComplexMatrix(std::size_t dim, std::initializer_list<Complex> entries)
        : dim_(dim), a_(entries) {
        if (a_.size() != dim * dim)
            throw std::invalid_argument("ComplexMatrix: entry count != dim^2");
    }

    static ComplexMatrix identity(std::size_t dim) {
        ComplexMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t dim() const { return dim_; }

    Complex& operator()(std::size_t i, std::size_t j) { return a_[i * dim_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return a_[i * dim_ + j]; }

    const std::vector<Complex>& data() const { return a_; }
    std::vector<Complex>& data() { return a_; }

    ComplexMatrix adjoint() const {
        ComplexMatrix r(dim_);
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j)
                r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    ComplexMatrix transpose() const {
        ComplexMatrix r(dim_);
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j)
                r(j, i) = (*this)(i, j);
        return r;
    }

    Complex trace() const {
        Complex t{0.0, 0.0};
        for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
        return t;
    }

    friend ComplexMatrix operator*(const ComplexMatrix& x, const ComplexMatrix& y) {
        if (x.dim_ != y.dim_)
            throw std::invalid_argument("matrix product: dimension mismatch");
        const std::size_t n = x.dim_;
        ComplexMatrix r(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                const Complex xik = x(i, k);
                if (xik == Complex{0.0, 0.0}) continue;
                for (std::size_t j = 0; j < n; ++j) r(i, j) += xik * y(k, j);
            }
        }
        return r;
    }

    friend ComplexMatrix operator+(const ComplexMatrix& x, const ComplexMatrix& y) {
        if (x.dim_ != y.dim_)
            throw std::invalid_argument("matrix sum: dimension mismatch");
        ComplexMatrix r = x;
        for (std::size_t i = 0; i < r.a_.size(); ++i) r.a_[i] += y.a_[i];
        return r;
    }

    friend ComplexMatrix operator-(const ComplexMatrix& x, const ComplexMatrix& y) {
        if (x.dim_ != y.dim_)
            throw std::invalid_argument("matrix difference: dimension mismatch");
        ComplexMatrix r = x;
        for (std::size_t i = 0; i < r.a_.size(); ++i) r.a_[i] -= y.a_[i];
        return r;
    }

    friend ComplexMatrix operator*(Complex s, const ComplexMatrix& x) {
        ComplexMatrix r = x;
        for (auto& v : r.a_) v *= s;
        return r;
    }

    // entrywise max magnitude
    double max_abs() const {
        double m = 0.0;
        for (const auto& v : a_) m = std::max(m, std::abs(v));
        return m;
    }

    std::vector<Complex> apply(const std::vector<Complex>& v) const {
        if (v.size() != dim_)
            throw std::invalid_argument("matrix apply: dimension mismatch");
        std::vector<Complex> r(dim_, Complex{0.0, 0.0});
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j) r[i] += (*this)(i, j) * v[j];
        return r;
    }

private:
    std::size_t dim_ = 0;
    std::vector<Complex> a_;
};

inline double max_abs_diff(const ComplexMatrix& x, const ComplexMatrix& y) {
    return (x - y).max_abs();
}

inline bool is_unitary(const ComplexMatrix& u, double tol = 1e-12) {
    return max_abs_diff(u.adjoint() * u, ComplexMatrix::identity(u.dim())) < tol;
}

}  // namespace hbcd
