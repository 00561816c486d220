#pragma once

// Small row-major dense matrix over any supported field. The library keeps
// its own container so the exact rational path and the float path share one
// code route; heavyweight oracles in the tests use Eigen instead.

#include "hypermix/errors.hpp"
#include "hypermix/scalar.hpp"

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hypermix {

template <Field T>
using Vector = std::vector<T>;

template <Field T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const T> data() const noexcept { return data_; }

    Matrix& operator+=(const Matrix& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Matrix& operator*=(const T& s) {
        for (auto& x : data_) x *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, const T& s) { return a *= s; }
    friend Matrix operator*(const T& s, Matrix a) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw InvalidArgument("matrix product shape mismatch");
        Matrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t l = 0; l < a.cols_; ++l) {
                const T& ail = a(i, l);
                if (is_zero(ail)) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += ail * b(l, j);
            }
        return out;
    }

    friend Vector<T> operator*(const Matrix& a, std::span<const T> x) {
        if (a.cols_ != x.size()) throw InvalidArgument("matrix-vector shape mismatch");
        Vector<T> out(a.rows_, T(0));
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t j = 0; j < a.cols_; ++j) out[i] += a(i, j) * x[j];
        return out;
    }
    friend Vector<T> operator*(const Matrix& a, const Vector<T>& x) { return a * std::span<const T>(x); }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    Matrix adjoint() const {
        Matrix out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out(j, i) = conjugate((*this)(i, j));
        return out;
    }

private:
    void require_same_shape(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw InvalidArgument("matrix shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

/// Largest entry modulus.
template <Field T>
double max_abs(const Matrix<T>& m) {
    double best = 0.0;
    for (const auto& x : m.data()) best = std::max(best, magnitude(x));
    return best;
}

template <Field T>
double max_abs(std::span<const T> v) {
    double best = 0.0;
    for (const auto& x : v) best = std::max(best, magnitude(x));
    return best;
}

template <Field T>
double max_abs(const Vector<T>& v) { return max_abs(std::span<const T>(v)); }

template <Field T>
double l1_norm(std::span<const T> v) {
    double s = 0.0;
    for (const auto& x : v) s += magnitude(x);
    return s;
}

template <Field T>
double l2_norm(std::span<const T> v) {
    double s = 0.0;
    for (const auto& x : v) {
        const double m = magnitude(x);
        s += m * m;
    }
    return std::sqrt(s);
}

template <Field T>
Vector<T> axpy(const T& a, const Vector<T>& x, Vector<T> y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
    return y;
}

template <Field T>
Vector<T> subtract(const Vector<T>& a, const Vector<T>& b) {
    Vector<T> out(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    return out;
}

template <Field T>
struct LuDecomposition {
    Matrix<T> lu;
    std::vector<std::size_t> perm;
    int sign = 1;
    bool singular = false;
};

// Gaussian elimination with row pivoting. For the rational backend any
// nonzero pivot is exact; for floats the largest modulus is taken.
template <Field T>
LuDecomposition<T> lu_decompose(Matrix<T> a) {
    if (a.rows() != a.cols()) throw InvalidArgument("LU needs a square matrix");
    const std::size_t n = a.rows();
    LuDecomposition<T> out;
    out.perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.perm[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        if constexpr (is_rational_v<T>) {
            while (piv < n && is_zero(a(piv, k))) ++piv;
            if (piv == n) {
                out.singular = true;
                continue;
            }
        } else {
            double best = magnitude(a(k, k));
            for (std::size_t r = k + 1; r < n; ++r)
                if (magnitude(a(r, k)) > best) {
                    best = magnitude(a(r, k));
                    piv = r;
                }
            if (best == 0.0) {
                out.singular = true;
                continue;
            }
        }
        if (piv != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(piv, c));
            std::swap(out.perm[k], out.perm[piv]);
            out.sign = -out.sign;
        }
        for (std::size_t r = k + 1; r < n; ++r) {
            if (is_zero(a(r, k))) continue;
            const T f = a(r, k) / a(k, k);
            a(r, k) = f;
            for (std::size_t c = k + 1; c < n; ++c) a(r, c) -= f * a(k, c);
        }
    }
    out.lu = std::move(a);
    return out;
}

template <Field T>
T determinant(const Matrix<T>& a) {
    auto d = lu_decompose(a);
    if (d.singular) return T(0);
    T det = T(d.sign);
    for (std::size_t i = 0; i < a.rows(); ++i) det *= d.lu(i, i);
    return det;
}

template <Field T>
Vector<T> lu_solve(const LuDecomposition<T>& d, std::span<const T> b) {
    if (d.singular) throw IllConditioned("singular system");
    const std::size_t n = d.lu.rows();
    Vector<T> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        T s = b[d.perm[i]];
        for (std::size_t j = 0; j < i; ++j) s -= d.lu(i, j) * y[j];
        y[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
        T s = y[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= d.lu(i, j) * y[j];
        y[i] = s / d.lu(i, i);
    }
    return y;
}

template <Field T>
Vector<T> solve(const Matrix<T>& a, std::span<const T> b) {
    return lu_solve(lu_decompose(a), b);
}

template <Field T>
Matrix<T> inverse(const Matrix<T>& a) {
    const auto d = lu_decompose(a);
    const std::size_t n = a.rows();
    Matrix<T> inv(n, n);
    Vector<T> e(n, T(0));
    for (std::size_t c = 0; c < n; ++c) {
        std::fill(e.begin(), e.end(), T(0));
        e[c] = T(1);
        const auto col = lu_solve(d, std::span<const T>(e));
        for (std::size_t r = 0; r < n; ++r) inv(r, c) = col[r];
    }
    return inv;
}

/// Converts entrywise between backends (rational -> float only).
template <Field To, Field From>
Matrix<To> convert(const Matrix<From>& m) {
    Matrix<To> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if constexpr (std::is_same_v<To, From>) out(i, j) = m(i, j);
            else if constexpr (is_rational_v<From>) out(i, j) = from_rational<To>(m(i, j));
            else out(i, j) = To(m(i, j));
        }
    return out;
}

// Column-rank of a set of vectors by elimination with a relative pivot
// threshold. Exact for rationals (threshold ignored).
template <Field T>
std::size_t rank_of(std::vector<Vector<T>> rows, double rel_tol = 1e-10) {
    if (rows.empty()) return 0;
    const std::size_t n = rows.front().size();
    double scale = 0.0;
    for (const auto& r : rows) scale = std::max(scale, max_abs(r));
    std::size_t rank = 0;
    for (std::size_t c = 0; c < n && rank < rows.size(); ++c) {
        std::size_t piv = rows.size();
        double best = 0.0;
        for (std::size_t r = rank; r < rows.size(); ++r) {
            const double m = magnitude(rows[r][c]);
            if constexpr (is_rational_v<T>) {
                if (!is_zero(rows[r][c])) {
                    piv = r;
                    break;
                }
            } else if (m > best) {
                best = m;
                piv = r;
            }
        }
        if (piv == rows.size()) continue;
        if constexpr (!is_rational_v<T>)
            if (best <= rel_tol * scale) continue;
        std::swap(rows[rank], rows[piv]);
        for (std::size_t r = rank + 1; r < rows.size(); ++r) {
            if (is_zero(rows[r][c])) continue;
            const T f = rows[r][c] / rows[rank][c];
            for (std::size_t j = c; j < n; ++j) rows[r][j] -= f * rows[rank][j];
        }
        ++rank;
    }
    return rank;
}


/// Basis of {x : a x = 0} from the reduced row echelon form. Pivots below
/// rel_tol times the largest entry count as zero for floats.
template <Field T>
std::vector<Vector<T>> nullspace(Matrix<T> a, double rel_tol = 1e-10) {
    const std::size_t rows = a.rows(), cols = a.cols();
    const double scale = max_abs(a);
    std::vector<std::size_t> pivot_cols;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = rows;
        double best = 0.0;
        for (std::size_t i = r; i < rows; ++i) {
            if constexpr (is_rational_v<T>) {
                if (!is_zero(a(i, c))) {
                    piv = i;
                    break;
                }
            } else if (magnitude(a(i, c)) > best) {
                best = magnitude(a(i, c));
                piv = i;
            }
        }
        if (piv == rows) continue;
        if constexpr (!is_rational_v<T>)
            if (best <= rel_tol * scale) continue;
        for (std::size_t j = 0; j < cols; ++j) std::swap(a(r, j), a(piv, j));
        const T inv = T(1) / a(r, c);
        for (std::size_t j = 0; j < cols; ++j) a(r, j) *= inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || is_zero(a(i, c))) continue;
            const T f = a(i, c);
            for (std::size_t j = 0; j < cols; ++j) a(i, j) -= f * a(r, j);
        }
        pivot_cols.push_back(c);
        ++r;
    }
    std::vector<bool> is_pivot(cols, false);
    for (const auto c : pivot_cols) is_pivot[c] = true;
    std::vector<Vector<T>> basis;
    for (std::size_t free = 0; free < cols; ++free) {
        if (is_pivot[free]) continue;
        Vector<T> v(cols, T(0));
        v[free] = T(1);
        for (std::size_t i = 0; i < pivot_cols.size(); ++i) v[pivot_cols[i]] = -a(i, free);
        basis.push_back(std::move(v));
    }
    return basis;
}

} // namespace hypermix
