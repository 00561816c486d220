#pragma once

// Test-only reference computations. Nothing here may call into the code path
// it is used to check: exponentials are summed as matrix power series,
// determinants are expanded over permutations, ranks come from Eigen.

#include "hypermix/dense.hpp"
#include "hypermix/scalar.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using hypermix::Complex;
using hypermix::Matrix;
using hypermix::Rational;

/// sum_{m=0}^{terms-1} (zN)^m / m! by repeated multiplication.
template <typename T>
Matrix<T> power_series_exp(const Matrix<T>& n, const T& z, std::size_t terms) {
    const std::size_t d = n.rows();
    Matrix<T> result = Matrix<T>::identity(d);
    Matrix<T> term = Matrix<T>::identity(d);
    for (std::size_t m = 1; m < terms; ++m) {
        term = term * n;
        term *= z / T(static_cast<long long>(m));
        result += term;
    }
    return result;
}

/// Leibniz expansion; only for small n.
template <typename T>
T leibniz_det(const Matrix<T>& a) {
    const std::size_t n = a.rows();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    T det = T(0);
    do {
        int inversions = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (perm[i] > perm[j]) ++inversions;
        T prod = T(1);
        for (std::size_t i = 0; i < n; ++i) prod *= a(i, perm[i]);
        det += (inversions % 2 == 0) ? prod : T(-prod);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return det;
}

inline Eigen::MatrixXcd to_eigen(const Matrix<Complex>& m) {
    Eigen::MatrixXcd e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
    return e;
}

inline Eigen::MatrixXd to_eigen(const Matrix<double>& m) {
    Eigen::MatrixXd e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
    return e;
}

/// Scaling-and-squaring Pade exponential from Eigen.
inline Eigen::MatrixXcd dense_expm(const Eigen::MatrixXcd& a) { return a.exp(); }

inline std::size_t eigen_rank(const Eigen::MatrixXd& m, double threshold = 1e-10) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    lu.setThreshold(threshold);
    return static_cast<std::size_t>(lu.rank());
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::vector<double> unit_box(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(rng, -1.0, 1.0);
    return v;
}

inline std::vector<Complex> unit_box_c(std::mt19937_64& rng, std::size_t n) {
    std::vector<Complex> v(n);
    for (auto& x : v) x = Complex(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0));
    return v;
}

} // namespace oracle
