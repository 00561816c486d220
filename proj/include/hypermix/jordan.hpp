#pragma once

// Nilpotent backward-shift blocks on K^{2n}: exact exponentials, the
// Hankel-factorial matrices A_{n,z}, and the two-sided steering solver that
// finds x with prescribed head u and prescribed head v of e^{zS}x.

#include "hypermix/dense.hpp"
#include "hypermix/errors.hpp"
#include "hypermix/scalar.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace hypermix::jordan {

/// Backward shift S on K^{2n}: S e_1 = 0, S e_k = e_{k-1}. E is spanned by the
/// first n basis vectors, F by the last n; P projects onto E along F.
struct ShiftBlock {
    std::size_t n = 1;

    explicit ShiftBlock(std::size_t half_dim) : n(half_dim) {
        if (half_dim == 0) throw InvalidArgument("shift block needs n >= 1");
    }

    std::size_t dim() const noexcept { return 2 * n; }

    template <Field T>
    Matrix<T> shift_matrix() const {
        Matrix<T> s(dim(), dim());
        for (std::size_t k = 1; k < dim(); ++k) s(k - 1, k) = T(1);
        return s;
    }

    /// Zero-pads E-coefficients into a full 2n vector.
    template <Field T>
    Vector<T> embed(std::span<const T> head) const {
        if (head.size() != n) throw InvalidArgument("E-vector must have n coefficients");
        Vector<T> out(dim(), T(0));
        std::copy(head.begin(), head.end(), out.begin());
        return out;
    }

    template <Field T>
    Vector<T> project(std::span<const T> x) const {
        return Vector<T>(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
    }
};

/// z^m / m! for m = 0..count-1, built by the running product so that the
/// rational backend stays exact.
template <Field T>
std::vector<T> scaled_powers(const T& z, std::size_t count) {
    std::vector<T> p(count);
    if (count == 0) return p;
    p[0] = T(1);
    for (std::size_t m = 1; m < count; ++m) p[m] = p[m - 1] * z / from_int<T>(static_cast<long long>(m));
    return p;
}

/// e^{zS} as the finite sum over S^m, m < 2n. Entry (j,k) is z^{k-j}/(k-j)!.
template <Field T>
Matrix<T> exp_shift(const ShiftBlock& block, const T& z) {
    const std::size_t d = block.dim();
    const auto p = scaled_powers(z, d);
    Matrix<T> m(d, d);
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = j; k < d; ++k) m(j, k) = p[k - j];
    return m;
}

/// Applies e^{zS} without forming the matrix.
template <Field T>
Vector<T> apply_exp_shift(std::span<const T> x, const T& z) {
    const std::size_t d = x.size();
    const auto p = scaled_powers(z, d);
    Vector<T> out(d, T(0));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t l = i; l < d; ++l) out[i] += p[l - i] * x[l];
    return out;
}

/// A_{n,z}: entry (j,k), 1-based, equals z^{j+k-1}/(j+k-1)!.
template <Field T>
Matrix<T> build_a_matrix(std::size_t n, const T& z) {
    if (n == 0) throw InvalidArgument("A_{n,z} needs n >= 1");
    const auto p = scaled_powers(z, 2 * n);
    Matrix<T> a(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) a(j, k) = p[j + k + 1];
    return a;
}

/// D_{n,z} = diag(1, z, ..., z^{n-1}).
template <Field T>
Matrix<T> scaling_diagonal(std::size_t n, const T& z) {
    Matrix<T> d(n, n);
    T p = T(1);
    for (std::size_t i = 0; i < n; ++i) {
        d(i, i) = p;
        p *= z;
    }
    return d;
}

namespace detail {

// Exact inverse of A_{n,1}, computed once per n. The matrix is severely
// ill-conditioned (cond ~ 3e16 at n = 8), so floats never invert it directly.
inline const Matrix<Rational>& exact_unit_inverse(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, Matrix<Rational>> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, inverse(build_a_matrix<Rational>(n, Rational(1)))).first;
    return it->second;
}

} // namespace detail

template <Field T>
struct SteeringProblem {
    ShiftBlock block;
    T z;
    Vector<T> u; ///< n leading coefficients
    Vector<T> v; ///< n leading coefficients
};

template <Field T>
struct SteeringSolution {
    Vector<T> x;     ///< full 2n vector x^z
    Vector<T> image; ///< e^{zS} x^z
    std::vector<double> tail_u; ///< |x_{n+j}|, j = 1..n
    std::vector<double> tail_v; ///< |(e^{zS}x)_{n+j}|, j = 1..n
    /// Relative residual of the z-free scaled system A_{n,1} y = D^{-1} w.
    double scaled_residual = 0.0;
    /// Max over the head of |(e^{zS}x)_i - v_i|, as evaluated in the backend.
    double head_residual = 0.0;
    /// Max over i of sum_l |z^{l-i}/(l-i)!| |x_l|: the roundoff scale of the
    /// image evaluation. Floats cannot resolve head residuals below
    /// eps * image_scale.
    double image_scale = 0.0;
};

inline constexpr double kSolveTolerance = 1e-9;

/// Right-hand side of the tail system divided by D_{n,z}:
/// b_j = w_j / z^{j-1} with w_j = v_{n-j+1} - sum_{k=n-j+1}^{n} z^{k+j-n-1} u_k / (k+j-n-1)!.
/// Written with nonpositive powers of z so large |z| stays well scaled.
template <Field T>
Vector<T> scaled_rhs(const SteeringProblem<T>& p) {
    const std::size_t n = p.block.n;
    const auto fact_inv = scaled_powers(T(1), n + 1); // 1/m!
    const T zinv = T(1) / p.z;
    std::vector<T> zinv_pow(n + 1);
    zinv_pow[0] = T(1);
    for (std::size_t m = 1; m <= n; ++m) zinv_pow[m] = zinv_pow[m - 1] * zinv;
    Vector<T> b(n);
    for (std::size_t j = 1; j <= n; ++j) {
        T s = p.v[n - j] * zinv_pow[j - 1];
        for (std::size_t k = n - j + 1; k <= n; ++k) s -= zinv_pow[n - k] * fact_inv[k + j - n - 1] * p.u[k - 1];
        b[j - 1] = s;
    }
    return b;
}

/// Unique x with P x = u and P e^{zS} x = v. The tail solve goes through
/// A_{n,z} = z D A_{n,1} D, so the only matrix inverted is the z-free A_{n,1}.
template <Field T>
SteeringSolution<T> solve_steering(const SteeringProblem<T>& p, double tol = kSolveTolerance) {
    const std::size_t n = p.block.n;
    if (p.u.size() != n || p.v.size() != n) throw InvalidArgument("u and v must have n coefficients");
    if (is_zero(p.z)) throw ZeroParameter("steering needs z != 0");

    const Vector<T> b = scaled_rhs(p);
    const auto a1_inv = convert<T>(detail::exact_unit_inverse(n));
    const Vector<T> y = a1_inv * b;

    SteeringSolution<T> out;
    {
        const auto a1 = build_a_matrix<T>(n, T(1));
        const auto r = subtract(a1 * y, b);
        const double bn = max_abs(b);
        out.scaled_residual = bn == 0.0 ? max_abs(r) : max_abs(r) / bn;
        if (out.scaled_residual > tol)
            throw IllConditioned("scaled tail solve residual " + std::to_string(out.scaled_residual));
    }

    // x_{n+j} = y_j / z^j
    out.x = p.block.embed(std::span<const T>(p.u));
    T zpow = p.z;
    for (std::size_t j = 0; j < n; ++j) {
        out.x[n + j] = y[j] / zpow;
        zpow *= p.z;
    }

    out.image = apply_exp_shift(std::span<const T>(out.x), p.z);
    const auto pw = scaled_powers(p.z, 2 * n);
    for (std::size_t i = 0; i < 2 * n; ++i) {
        double s = 0.0;
        for (std::size_t l = i; l < 2 * n; ++l) s += magnitude(pw[l - i]) * magnitude(out.x[l]);
        out.image_scale = std::max(out.image_scale, s);
    }
    for (std::size_t i = 0; i < n; ++i)
        out.head_residual = std::max(out.head_residual, magnitude(T(out.image[i] - p.v[i])));
    out.tail_u.resize(n);
    out.tail_v.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.tail_u[j] = magnitude(out.x[n + j]);
        out.tail_v[j] = magnitude(out.image[n + j]);
    }
    return out;
}

/// Solutions for a fixed block and z share the rhs-to-tail map; this is a
/// convenience for the common "steer e_i to 0" style calls.
template <Field T>
SteeringSolution<T> steer(std::size_t n, const T& z, Vector<T> u, Vector<T> v) {
    return solve_steering(SteeringProblem<T>{ShiftBlock(n), z, std::move(u), std::move(v)});
}

struct DecayReport {
    std::size_t n = 0;
    /// sup over samples of |x_{n+j}| |z|^j and |(e^{zS}x)_{n+j}| |z|^j, per j.
    std::vector<double> sup_scaled_x;
    std::vector<double> sup_scaled_image;
    double c = 0.0; ///< max of the two sups over j
    /// Least-squares slope of log(sup_pairs |x_{n+j}|) against log|z|; empty when
    /// every magnitude is zero.
    std::vector<std::optional<double>> slope_x;
    std::vector<std::optional<double>> slope_image;
};

namespace detail {

inline std::optional<double> loglog_slope(std::span<const double> zmag, std::span<const double> vals) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < zmag.size(); ++i)
        if (vals[i] > 0.0) pts.emplace_back(std::log(zmag[i]), std::log(vals[i]));
    if (pts.size() < 2) return std::nullopt;
    double mx = 0, my = 0;
    for (auto [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxy = 0, sxx = 0;
    for (auto [x, y] : pts) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if (sxx == 0.0) return std::nullopt;
    return sxy / sxx;
}

} // namespace detail

/// Empirical check of the |z|^{-j} decay of both tails over a bounded set of
/// (u, v) pairs. All samples must satisfy |z| >= eps.
template <Field T>
DecayReport verify_decay(const ShiftBlock& block, std::span<const std::pair<Vector<T>, Vector<T>>> bound_set,
                         double eps, std::span<const T> z_samples) {
    const std::size_t n = block.n;
    DecayReport rep;
    rep.n = n;
    rep.sup_scaled_x.assign(n, 0.0);
    rep.sup_scaled_image.assign(n, 0.0);
    std::vector<std::vector<double>> max_x(n, std::vector<double>(z_samples.size(), 0.0));
    std::vector<std::vector<double>> max_img = max_x;
    std::vector<double> zmag(z_samples.size());
    for (std::size_t s = 0; s < z_samples.size(); ++s) {
        const T& z = z_samples[s];
        zmag[s] = magnitude(z);
        if (!(zmag[s] >= eps)) throw InvalidArgument("z sample below eps");
        for (const auto& [u, v] : bound_set) {
            const auto sol = solve_steering(SteeringProblem<T>{block, z, u, v});
            double zp = 1.0;
            for (std::size_t j = 0; j < n; ++j) {
                zp *= zmag[s];
                max_x[j][s] = std::max(max_x[j][s], sol.tail_u[j]);
                max_img[j][s] = std::max(max_img[j][s], sol.tail_v[j]);
                rep.sup_scaled_x[j] = std::max(rep.sup_scaled_x[j], sol.tail_u[j] * zp);
                rep.sup_scaled_image[j] = std::max(rep.sup_scaled_image[j], sol.tail_v[j] * zp);
            }
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        rep.c = std::max({rep.c, rep.sup_scaled_x[j], rep.sup_scaled_image[j]});
        rep.slope_x.push_back(detail::loglog_slope(zmag, max_x[j]));
        rep.slope_image.push_back(detail::loglog_slope(zmag, max_img[j]));
    }
    return rep;
}

} // namespace hypermix::jordan
