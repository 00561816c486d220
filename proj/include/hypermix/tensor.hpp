#pragma once

// k-fold tensor products of backward-shift blocks on the product grid
// M = N_1 x ... x N_k, N_j = {1..2n_j}. Multi-indices are 1-based as in the
// grid definition; storage is row-major with the last axis fastest.

#include "hypermix/dense.hpp"
#include "hypermix/errors.hpp"
#include "hypermix/jordan.hpp"
#include "hypermix/scalar.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hypermix::tensor {

using MultiIndex = std::vector<std::size_t>;

inline constexpr std::size_t kDefaultCap = 4096;

class TensorTuple {
public:
    TensorTuple(std::vector<std::size_t> dims, std::size_t cap = kDefaultCap) : dims_(std::move(dims)) {
        if (dims_.empty()) throw InvalidArgument("tensor tuple needs k >= 1");
        size_ = 1;
        for (auto n : dims_) {
            if (n == 0) throw InvalidArgument("every n_j must be >= 1");
            if (size_ > cap / (2 * n)) throw CapExceeded("product grid exceeds cap " + std::to_string(cap));
            size_ *= 2 * n;
        }
        strides_.assign(dims_.size(), 1);
        for (std::size_t j = dims_.size() - 1; j-- > 0;) strides_[j] = strides_[j + 1] * 2 * dims_[j + 1];
        // Column maps: T_j e_m = e_{m - e_j} or 0.
        targets_.assign(dims_.size(), std::vector<std::ptrdiff_t>(size_, -1));
        for (std::size_t flat = 0; flat < size_; ++flat) {
            const auto m = multi_index(flat);
            for (std::size_t j = 0; j < dims_.size(); ++j)
                if (m[j] > 1) targets_[j][flat] = static_cast<std::ptrdiff_t>(flat - strides_[j]);
        }
    }

    std::size_t k() const noexcept { return dims_.size(); }
    std::size_t size() const noexcept { return size_; }
    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    std::size_t axis_length(std::size_t j) const { return 2 * dims_.at(j); }

    std::size_t flat_index(const MultiIndex& m) const {
        if (m.size() != k()) throw IndexOutOfRange("multi-index arity");
        std::size_t flat = 0;
        for (std::size_t j = 0; j < k(); ++j) {
            if (m[j] < 1 || m[j] > 2 * dims_[j]) throw IndexOutOfRange("grid coordinate out of range");
            flat += (m[j] - 1) * strides_[j];
        }
        return flat;
    }

    MultiIndex multi_index(std::size_t flat) const {
        MultiIndex m(k());
        for (std::size_t j = 0; j < k(); ++j) {
            m[j] = flat / strides_[j] + 1;
            flat %= strides_[j];
        }
        return m;
    }

    /// Image of basis column `flat` under T_j, or nullopt when T_j e_m = 0.
    std::optional<std::size_t> shift_target(std::size_t j, std::size_t flat) const {
        const auto t = targets_.at(j).at(flat);
        if (t < 0) return std::nullopt;
        return static_cast<std::size_t>(t);
    }

    template <Field T>
    Vector<T> apply_shift(std::size_t j, std::span<const T> x) const {
        Vector<T> out(size_, T(0));
        for (std::size_t c = 0; c < size_; ++c)
            if (auto t = shift_target(j, c)) out[*t] += x[c];
        return out;
    }

    template <Field T>
    Matrix<T> operator_matrix(std::size_t j) const {
        Matrix<T> m(size_, size_);
        for (std::size_t c = 0; c < size_; ++c)
            if (auto t = shift_target(j, c)) m(*t, c) = T(1);
        return m;
    }

    /// M_0 = Q_1 x ... x Q_k as flat indices; spans E.
    std::vector<std::size_t> e_block() const {
        std::vector<std::size_t> out;
        for (std::size_t flat = 0; flat < size_; ++flat) {
            const auto m = multi_index(flat);
            bool inside = true;
            for (std::size_t j = 0; j < k(); ++j) inside = inside && m[j] <= dims_[j];
            if (inside) out.push_back(flat);
        }
        return out;
    }

    bool in_e_block(std::size_t flat) const {
        const auto m = multi_index(flat);
        for (std::size_t j = 0; j < k(); ++j)
            if (m[j] > dims_[j]) return false;
        return true;
    }

    /// Outer product of per-axis vectors in the grid's flattening order.
    template <Field T>
    Vector<T> kron(const std::vector<Vector<T>>& factors) const {
        Vector<T> out(size_);
        for (std::size_t flat = 0; flat < size_; ++flat) {
            const auto m = multi_index(flat);
            T p = T(1);
            for (std::size_t j = 0; j < k(); ++j) p *= factors[j][m[j] - 1];
            out[flat] = p;
        }
        return out;
    }

    /// Applies a (2n_j x 2n_j) matrix along axis j.
    template <Field T>
    Vector<T> apply_along_axis(std::size_t j, const Matrix<T>& a, std::span<const T> x) const {
        Vector<T> out(size_, T(0));
        const std::size_t len = axis_length(j);
        const std::size_t stride = strides_[j];
        for (std::size_t flat = 0; flat < size_; ++flat) {
            const std::size_t pos = (flat / stride) % len;
            const std::size_t base = flat - pos * stride;
            T s = T(0);
            for (std::size_t c = 0; c < len; ++c) {
                const T& coef = a(pos, c);
                if (!is_zero(coef)) s += coef * x[base + c * stride];
            }
            out[flat] = s;
        }
        return out;
    }

    /// Nilpotency degree bound: N^{D+1} = 0 for N = <z,T>.
    std::size_t degree_bound() const {
        std::size_t d = 0;
        for (auto n : dims_) d += 2 * n - 1;
        return d;
    }

private:
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
    std::vector<std::vector<std::ptrdiff_t>> targets_;
};

inline TensorTuple build_tensor_tuple(std::vector<std::size_t> dims, std::size_t cap = kDefaultCap) {
    return TensorTuple(std::move(dims), cap);
}

struct KernelSubspace {
    MultiIndex n;
    std::vector<std::size_t> basis; ///< flat grid indices, ascending
};

/// kappa(n,T) = T_1^{n_1}...T_k^{n_k}( intersection_j ker T_j^{2n_j} ).
/// The T_j send basis vectors to basis vectors or zero and are injective on
/// the survivors, so both the kernel and the image are coordinate spans.
inline KernelSubspace compute_kappa(const TensorTuple& t, const MultiIndex& n) {
    if (n.size() != t.k()) throw IndexOutOfRange("multi-index arity");
    for (std::size_t j = 0; j < t.k(); ++j)
        if (n[j] < 1 || n[j] > t.dims()[j]) throw IndexOutOfRange("n_j must lie in 1..dims_j");

    auto power_image = [&](std::size_t j, std::size_t p, std::size_t flat) -> std::optional<std::size_t> {
        std::optional<std::size_t> cur = flat;
        for (std::size_t s = 0; s < p && cur; ++s) cur = t.shift_target(j, *cur);
        return cur;
    };

    KernelSubspace out{n, {}};
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
        bool in_kernel = true;
        for (std::size_t j = 0; j < t.k() && in_kernel; ++j) in_kernel = !power_image(j, 2 * n[j], flat).has_value();
        if (!in_kernel) continue;
        std::optional<std::size_t> img = flat;
        for (std::size_t j = 0; j < t.k() && img; ++j) img = power_image(j, n[j], *img);
        if (img) out.basis.push_back(*img);
    }
    std::sort(out.basis.begin(), out.basis.end());
    out.basis.erase(std::unique(out.basis.begin(), out.basis.end()), out.basis.end());
    return out;
}

/// Dense e^{<z,T>} as the finite sum of N^m/m!, N = sum_j z_j T_j.
template <Field T>
Matrix<T> exp_linear_combination(const TensorTuple& t, std::span<const T> z) {
    if (z.size() != t.k()) throw InvalidArgument("z must have k entries");
    const std::size_t d = t.size();
    const std::size_t deg = t.degree_bound();
    Matrix<T> out(d, d);
    Vector<T> term(d), next(d);
    for (std::size_t c = 0; c < d; ++c) {
        std::fill(term.begin(), term.end(), T(0));
        term[c] = T(1);
        out(c, c) += T(1);
        for (std::size_t m = 1; m <= deg; ++m) {
            std::fill(next.begin(), next.end(), T(0));
            for (std::size_t j = 0; j < t.k(); ++j) {
                if (is_zero(z[j])) continue;
                for (std::size_t col = 0; col < d; ++col) {
                    if (is_zero(term[col])) continue;
                    if (auto tgt = t.shift_target(j, col)) next[*tgt] += z[j] * term[col];
                }
            }
            const T inv_m = T(1) / from_int<T>(static_cast<long long>(m));
            bool any = false;
            for (std::size_t r = 0; r < d; ++r) {
                term[r] = next[r] * inv_m;
                if (!is_zero(term[r])) {
                    any = true;
                    out(r, c) += term[r];
                }
            }
            if (!any) break;
        }
    }
    return out;
}

/// e^{<z,T>} x computed factor by factor: the T_j commute, so the exponential
/// is the product of e^{z_j T_j}, each acting along one axis.
template <Field T>
Vector<T> apply_exp(const TensorTuple& t, std::span<const T> z, std::span<const T> x) {
    if (z.size() != t.k()) throw InvalidArgument("z must have k entries");
    Vector<T> cur(x.begin(), x.end());
    for (std::size_t j = 0; j < t.k(); ++j) {
        if (is_zero(z[j])) continue;
        cur = t.apply_along_axis(j, jordan::exp_shift(jordan::ShiftBlock(t.dims()[j]), z[j]), std::span<const T>(cur));
    }
    return cur;
}

template <Field T>
struct TensorSteering {
    double tau = 10.0;
    std::vector<std::optional<Vector<T>>> x; ///< nullopt where no coordinate is large
    std::vector<std::optional<Vector<T>>> image; ///< e^{<z_m,T>} x_m
    std::vector<double> residual_x;          ///< ||x_m - u||_inf (NaN when not steerable)
    std::vector<double> residual_image;      ///< ||e^{<z_m,T>} x_m - v||_inf
    std::vector<std::size_t> no_large_coordinate; ///< indices m reported as NoLargeCoordinate
    bool decreasing_tail = false; ///< both curves non-increasing over the final third
};

namespace detail {

// Per-axis factor vectors for one parameter z. to_zero[i] has head e_i and an
// image that vanishes as |z_j| grows; from_zero[i] vanishes itself while its
// image tends to e_i. Small coordinates use e_i and e^{-z_j S_j} e_i.
template <Field T>
struct AxisFactors {
    std::vector<Vector<T>> to_zero;
    std::vector<Vector<T>> from_zero;
    std::vector<Vector<T>> to_zero_image;   ///< e^{z_j S_j} to_zero[i]
    std::vector<Vector<T>> from_zero_image; ///< e^{z_j S_j} from_zero[i]
};

template <Field T>
AxisFactors<T> axis_factors(std::size_t n, const T& z, bool large) {
    AxisFactors<T> f;
    const jordan::ShiftBlock block(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vector<T> e(n, T(0));
        e[i] = T(1);
        if (large) {
            auto a = jordan::steer<T>(n, z, e, Vector<T>(n, T(0)));
            auto b = jordan::steer<T>(n, z, Vector<T>(n, T(0)), e);
            f.to_zero.push_back(std::move(a.x));
            f.to_zero_image.push_back(std::move(a.image));
            f.from_zero.push_back(std::move(b.x));
            f.from_zero_image.push_back(std::move(b.image));
        } else {
            const auto full = block.embed<T>(e);
            f.to_zero.push_back(full);
            f.to_zero_image.push_back(jordan::apply_exp_shift<T>(full, z));
            f.from_zero.push_back(jordan::apply_exp_shift<T>(full, T(-z)));
            f.from_zero_image.push_back(full);
        }
    }
    return f;
}

inline bool non_increasing_tail(const std::vector<double>& r) {
    if (r.size() < 2) return true;
    const std::size_t start = r.size() - std::max<std::size_t>(2, (r.size() + 2) / 3);
    for (std::size_t i = start + 1; i < r.size(); ++i)
        if (!(r[i] <= r[i - 1])) return false;
    return true;
}

} // namespace detail

/// Builds x_m with x_m -> u and e^{<z_m,T>} x_m -> v for u, v in E by steering
/// each basis vector of E to and from zero and combining linearly.
///
/// The image e^{<z_m,T>} x_m is assembled from the per-factor images: x_m is a
/// sum of pure tensors and the exponential acts factorwise. Applying the
/// exponential to the flattened float vector instead would multiply the
/// per-factor cancellation errors together.
template <Field T>
TensorSteering<T> steer_tensor(const TensorTuple& t, std::span<const T> u, std::span<const T> v,
                               const std::vector<Vector<T>>& z_seq, double tau = 10.0) {
    if (u.size() != t.size() || v.size() != t.size()) throw InvalidArgument("u, v must live on the full grid");
    for (std::size_t flat = 0; flat < t.size(); ++flat)
        if ((!is_zero(u[flat]) || !is_zero(v[flat])) && !t.in_e_block(flat))
            throw InvalidArgument("u and v must be supported on M_0");

    TensorSteering<T> out;
    out.tau = tau;
    const auto block = t.e_block();
    for (std::size_t m = 0; m < z_seq.size(); ++m) {
        const auto& z = z_seq[m];
        if (z.size() != t.k()) throw InvalidArgument("each z_m must have k entries");
        bool any_large = false;
        std::vector<detail::AxisFactors<T>> factors;
        for (std::size_t j = 0; j < t.k(); ++j) {
            const bool large = magnitude(z[j]) >= tau;
            any_large = any_large || large;
            factors.push_back(detail::axis_factors<T>(t.dims()[j], z[j], large));
        }
        if (!any_large) {
            out.x.emplace_back(std::nullopt);
            out.image.emplace_back(std::nullopt);
            out.residual_x.push_back(std::numeric_limits<double>::quiet_NaN());
            out.residual_image.push_back(std::numeric_limits<double>::quiet_NaN());
            out.no_large_coordinate.push_back(m);
            continue;
        }
        Vector<T> x(t.size(), T(0)), img(t.size(), T(0));
        std::vector<Vector<T>> pick(t.k()), pick_img(t.k());
        for (const std::size_t flat : block) {
            if (is_zero(u[flat]) && is_zero(v[flat])) continue;
            const auto mi = t.multi_index(flat);
            if (!is_zero(u[flat])) {
                for (std::size_t j = 0; j < t.k(); ++j) {
                    pick[j] = factors[j].to_zero[mi[j] - 1];
                    pick_img[j] = factors[j].to_zero_image[mi[j] - 1];
                }
                x = axpy(T(u[flat]), t.kron(pick), std::move(x));
                img = axpy(T(u[flat]), t.kron(pick_img), std::move(img));
            }
            if (!is_zero(v[flat])) {
                for (std::size_t j = 0; j < t.k(); ++j) {
                    pick[j] = factors[j].from_zero[mi[j] - 1];
                    pick_img[j] = factors[j].from_zero_image[mi[j] - 1];
                }
                x = axpy(T(v[flat]), t.kron(pick), std::move(x));
                img = axpy(T(v[flat]), t.kron(pick_img), std::move(img));
            }
        }
        out.residual_x.push_back(max_abs(subtract(x, Vector<T>(u.begin(), u.end()))));
        out.residual_image.push_back(max_abs(subtract(img, Vector<T>(v.begin(), v.end()))));
        out.x.emplace_back(std::move(x));
        out.image.emplace_back(std::move(img));
    }
    out.decreasing_tail = detail::non_increasing_tail(out.residual_x) && detail::non_increasing_tail(out.residual_image);
    return out;
}

} // namespace hypermix::tensor
