#pragma once

// Exponential operator group on a truncated l1 sequence model.
//
// The concrete instance: x_n is the n-th unit vector, f_k(x) = d_k x_k with
// 0 < |d_k| <= 1, p(x) = sup_k |f_k(x)| and q the l1 norm (the disk is the
// l1 unit ball). Multi-indices n in Z_+^k are flattened by a graded
// lexicographic bijection, and truncation keeps whole grades, so every A_j
// (which lowers the grade by one) restricts exactly to the kept subspace.

#include "hypermix/dense.hpp"
#include "hypermix/errors.hpp"
#include "hypermix/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hypermix::seqspace {

using MultiIndex = std::vector<std::size_t>;

namespace detail {

inline std::size_t checked_binomial(std::size_t n, std::size_t r) {
    if (r > n) return 0;
    r = std::min(r, n - r);
    std::size_t out = 1;
    for (std::size_t i = 1; i <= r; ++i) {
        const std::size_t num = n - r + i;
        // out * num / i stays integral at every step
        if (out > std::numeric_limits<std::size_t>::max() / num) throw CapExceeded("binomial overflow");
        out = out * num / i;
    }
    return out;
}

// number of ways to write `total` as an ordered sum of `parts` nonnegative terms
inline std::size_t compositions(std::size_t total, std::size_t parts) {
    if (parts == 0) return total == 0 ? 1 : 0;
    return checked_binomial(total + parts - 1, parts - 1);
}

} // namespace detail

inline std::size_t grade(const MultiIndex& n) {
    std::size_t g = 0;
    for (const auto v : n) g += v;
    return g;
}

/// Graded-lex enumeration of Z_+^k: grade g precedes g+1, and inside a grade
/// tuples are ordered lexicographically, so (0,1) comes before (1,0).
class GradedIndex {
public:
    explicit GradedIndex(std::size_t k) : k_(k) {
        if (k == 0) throw InvalidArgument("gamma needs k >= 1");
    }

    std::size_t k() const noexcept { return k_; }

    /// Number of multi-indices of grade <= g.
    std::size_t count_up_to(std::size_t g) const { return detail::checked_binomial(g + k_, k_); }

    std::size_t forward(const MultiIndex& n) const {
        if (n.size() != k_) throw IndexOutOfRange("multi-index has wrong length");
        const std::size_t g = grade(n);
        std::size_t idx = g == 0 ? 0 : count_up_to(g - 1);
        std::size_t rest = g;
        for (std::size_t i = 0; i + 1 < k_; ++i) {
            for (std::size_t v = 0; v < n[i]; ++v) idx += detail::compositions(rest - v, k_ - i - 1);
            rest -= n[i];
        }
        return idx;
    }

    MultiIndex inverse(std::size_t idx) const {
        std::size_t g = 0;
        while (count_up_to(g) <= idx) ++g;
        std::size_t offset = idx - (g == 0 ? 0 : count_up_to(g - 1));
        MultiIndex n(k_, 0);
        std::size_t rest = g;
        for (std::size_t i = 0; i + 1 < k_; ++i) {
            std::size_t v = 0;
            for (;;) {
                const std::size_t c = detail::compositions(rest - v, k_ - i - 1);
                if (offset < c) break;
                offset -= c;
                ++v;
            }
            n[i] = v;
            rest -= v;
        }
        n[k_ - 1] = rest;
        return n;
    }

    /// Truncation grade G with count_up_to(G) == dim, or IncompleteGrade.
    std::size_t grade_for_dimension(std::size_t dim) const {
        std::size_t g = 0;
        while (count_up_to(g) < dim) ++g;
        if (count_up_to(g) != dim)
            throw IncompleteGrade("N = " + std::to_string(dim) + " is not a grade boundary for k = " +
                                  std::to_string(k_));
        return g;
    }

private:
    std::size_t k_;
};

inline GradedIndex gamma_bijection(std::size_t k) { return GradedIndex(k); }

// ---------------------------------------------------------------------------
// Biorthogonalization

template <Field T>
struct Biorthogonal {
    std::vector<Vector<T>> g;        ///< g_n = f_n + sum_{j<n} alpha(n,j) f_j
    std::vector<Vector<T>> x;        ///< x_k = y_k + sum_{j<k} beta(k,j) y_j
    Matrix<T> alpha;                 ///< strictly lower triangular
    Matrix<T> beta;                  ///< strictly lower triangular
    std::vector<std::size_t> picked; ///< candidate chosen as y_n
    double residual = 0.0;           ///< max |g_n(x_k)| over n != k
};

namespace detail {

template <Field T>
T apply_row(const Vector<T>& row, const Vector<T>& col) {
    T s = T(0);
    for (std::size_t i = 0; i < row.size(); ++i) s += row[i] * col[i];
    return s;
}

} // namespace detail

/// Inductive construction: g_n is f_n corrected by earlier functionals so it
/// kills y_0..y_{n-1}, then y_n is a candidate with g_n(y_n) != 0 (largest
/// modulus for floats, first nonzero for rationals). A final triangular pass
/// turns the y's into x's with g_n(x_k) = 0 for every n != k.
template <Field T>
Biorthogonal<T> biorthogonalize(const std::vector<Vector<T>>& functionals, const std::vector<Vector<T>>& candidates,
                                double rel_tol = 1e-10) {
    const std::size_t d = functionals.size();
    if (d == 0) throw InvalidArgument("no functionals");
    for (const auto& f : functionals)
        if (f.size() != d) throw InvalidArgument("functionals must be square: d rows of length d");
    for (const auto& c : candidates)
        if (c.size() != d) throw InvalidArgument("candidate length differs from d");

    double scale = 0.0;
    for (const auto& f : functionals) scale = std::max(scale, max_abs(f));
    double cand_scale = 0.0;
    for (const auto& c : candidates) cand_scale = std::max(cand_scale, max_abs(c));

    Biorthogonal<T> out;
    out.alpha = Matrix<T>(d, d);
    out.beta = Matrix<T>(d, d);
    std::vector<Vector<T>> y;
    std::vector<bool> used(candidates.size(), false);

    for (std::size_t n = 0; n < d; ++n) {
        Vector<T> gn = functionals[n];
        if (n > 0) {
            // sum_j alpha_j f_j(y_m) = -f_n(y_m), m < n
            Matrix<T> sys(n, n);
            Vector<T> rhs(n);
            for (std::size_t m = 0; m < n; ++m) {
                for (std::size_t j = 0; j < n; ++j) sys(m, j) = detail::apply_row(functionals[j], y[m]);
                rhs[m] = -detail::apply_row(functionals[n], y[m]);
            }
            const auto coef = solve(sys, std::span<const T>(rhs));
            for (std::size_t j = 0; j < n; ++j) {
                out.alpha(n, j) = coef[j];
                gn = axpy(coef[j], functionals[j], std::move(gn));
            }
        }
        const double gmag = max_abs(gn);
        if constexpr (is_rational_v<T>) {
            if (gmag == 0.0 && std::all_of(gn.begin(), gn.end(), [](const T& v) { return is_zero(v); }))
                throw DependentFunctionals("f_" + std::to_string(n) + " lies in the span of earlier functionals");
        } else if (gmag <= rel_tol * scale) {
            throw DependentFunctionals("f_" + std::to_string(n) + " lies in the span of earlier functionals");
        }

        std::size_t pick = candidates.size();
        double best = 0.0;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (used[c]) continue;
            const T val = detail::apply_row(gn, candidates[c]);
            if constexpr (is_rational_v<T>) {
                if (!is_zero(val)) {
                    pick = c;
                    break;
                }
            } else if (magnitude(val) > best) {
                best = magnitude(val);
                pick = c;
            }
        }
        if constexpr (!is_rational_v<T>)
            if (pick != candidates.size() && best <= rel_tol * gmag * cand_scale) pick = candidates.size();
        if (pick == candidates.size()) throw InvalidArgument("candidates do not span the space");
        used[pick] = true;
        out.picked.push_back(pick);
        y.push_back(candidates[pick]);
        out.g.push_back(std::move(gn));
    }

    // x_k = y_k + sum_{j<k} beta_j y_j with g_n(x_k) = 0 for n < k. Since
    // g_n(y_j) = 0 for j < n the system is upper triangular: back substitution.
    for (std::size_t k = 0; k < d; ++k) {
        Vector<T> coef(k, T(0));
        for (std::size_t n = k; n-- > 0;) {
            T s = detail::apply_row(out.g[n], y[k]);
            for (std::size_t j = n + 1; j < k; ++j) s += coef[j] * detail::apply_row(out.g[n], y[j]);
            coef[n] = -s / detail::apply_row(out.g[n], y[n]);
        }
        Vector<T> xk = y[k];
        for (std::size_t j = 0; j < k; ++j) {
            out.beta(k, j) = coef[j];
            xk = axpy(coef[j], y[j], std::move(xk));
        }
        out.x.push_back(std::move(xk));
    }

    for (std::size_t n = 0; n < d; ++n)
        for (std::size_t k = 0; k < d; ++k)
            if (n != k) out.residual = std::max(out.residual, magnitude(detail::apply_row(out.g[n], out.x[k])));
    return out;
}

// ---------------------------------------------------------------------------
// Sparse operators

template <Field T>
class SparseOperator {
public:
    using Entry = std::pair<std::size_t, T>;

    explicit SparseOperator(std::size_t dim) : rows_(dim) {}

    std::size_t dim() const noexcept { return rows_.size(); }

    void add(std::size_t row, std::size_t col, const T& v) {
        if (row >= dim() || col >= dim()) throw IndexOutOfRange("sparse entry outside the truncation");
        if (is_zero(v)) return;
        for (auto& [c, x] : rows_[row])
            if (c == col) {
                x += v;
                return;
            }
        rows_[row].emplace_back(col, v);
    }

    const std::vector<Entry>& row(std::size_t r) const { return rows_.at(r); }

    T entry(std::size_t r, std::size_t c) const {
        for (const auto& [col, v] : rows_.at(r))
            if (col == c) return v;
        return T(0);
    }

    std::size_t nnz() const {
        std::size_t n = 0;
        for (const auto& r : rows_) n += r.size();
        return n;
    }

    Vector<T> apply(std::span<const T> x) const {
        if (x.size() != dim()) throw InvalidArgument("vector length differs from operator dimension");
        Vector<T> out(dim(), T(0));
        for (std::size_t r = 0; r < dim(); ++r)
            for (const auto& [c, v] : rows_[r]) out[r] += v * x[c];
        return out;
    }
    Vector<T> apply(const Vector<T>& x) const { return apply(std::span<const T>(x)); }

    Matrix<T> dense() const {
        Matrix<T> m(dim(), dim());
        for (std::size_t r = 0; r < dim(); ++r)
            for (const auto& [c, v] : rows_[r]) m(r, c) += v;
        return m;
    }

private:
    std::vector<std::vector<Entry>> rows_;
};

// ---------------------------------------------------------------------------
// The alpha recursion

/// alpha_{m+1} = slack * 2^m * alpha_m / eps_m with alpha_0 = 1, as natural
/// logarithms. slack = 1 is the equality choice; slack > 1 makes the
/// coefficient bound |c_{j,n}| < 2^{-|n|} strict.
inline std::vector<double> build_alpha_sequence(std::span<const double> eps, std::size_t grades, double slack = 1.0) {
    if (!(slack >= 1.0)) throw InvalidArgument("slack must be >= 1");
    if (eps.size() < grades) throw InvalidArgument("need eps_0..eps_{M-1}");
    std::vector<double> log_alpha{0.0};
    for (std::size_t m = 0; m < grades; ++m) {
        if (!(eps[m] > 0.0)) throw NonpositiveEpsilon("eps_" + std::to_string(m) + " must be positive");
        log_alpha.push_back(log_alpha.back() + std::log(slack) + static_cast<double>(m) * std::numbers::ln2 -
                            std::log(eps[m]));
    }
    return log_alpha;
}

/// Exact variant for rational experiments.
inline std::vector<Rational> build_alpha_sequence_exact(std::span<const Rational> eps, std::size_t grades,
                                                        const Rational& slack = Rational(1)) {
    if (slack < 1) throw InvalidArgument("slack must be >= 1");
    if (eps.size() < grades) throw InvalidArgument("need eps_0..eps_{M-1}");
    std::vector<Rational> alpha{Rational(1)};
    Rational pow2(1);
    for (std::size_t m = 0; m < grades; ++m) {
        if (eps[m] <= 0) throw NonpositiveEpsilon("eps_" + std::to_string(m) + " must be positive");
        alpha.push_back(slack * pow2 * alpha.back() / eps[m]);
        pow2 *= 2;
    }
    return alpha;
}

// ---------------------------------------------------------------------------
// The model

/// One stored coefficient c_{j,n} of A_j x = sum_n c_{j,n} f_{gamma(n+e_j)}(x) x_{gamma(n)}.
template <Field T>
struct Coefficient {
    std::size_t axis;   ///< j, zero-based
    std::size_t target; ///< gamma(n)
    std::size_t source; ///< gamma(n + e_j)
    std::size_t grade;  ///< |n|
    T value;
};

template <Field T>
struct SeqSpaceModel {
    GradedIndex gamma{1};
    std::size_t max_grade = 0;
    std::size_t N = 0;
    Vector<T> diagonal;              ///< f_n(x_n)
    std::vector<double> eps;         ///< eps_0..eps_{G-1}
    std::vector<double> log_alpha;   ///< alpha_0..alpha_G
    std::vector<T> alpha_ratio;      ///< alpha_m / alpha_{m+1}, m < G
    double slack = 1.0;
    std::vector<Coefficient<T>> coeffs;
    std::vector<SparseOperator<T>> A;

    std::size_t k() const { return gamma.k(); }

    /// Bound constant of q(A_j x) <= a p(x): C = sum_n 2^{-|n|} = 2^k.
    double a() const { return std::ldexp(1.0, static_cast<int>(k())); }
    /// p(x) <= c q(x) on the disk span; |d_k| <= 1 gives c = 1.
    double c() const { return 1.0; }

    double p(std::span<const T> x) const {
        double best = 0.0;
        for (std::size_t i = 0; i < N; ++i) best = std::max(best, magnitude(T(diagonal[i] * x[i])));
        return best;
    }
    double q(std::span<const T> x) const { return l1_norm(x); }
};

namespace detail {

template <Field T>
T field_abs(const T& v) {
    if constexpr (is_rational_v<T>) return v < 0 ? T(-v) : v;
    else return T(std::abs(v));
}

} // namespace detail

/// Builds the truncated model on N basis vectors (N must close a grade).
/// `diagonal_cycle` supplies f_n(x_n) = cycle[n mod len].
template <Field T>
SeqSpaceModel<T> build_model(std::size_t k, std::size_t N, const std::vector<T>& diagonal_cycle, T slack = T(1)) {
    if (diagonal_cycle.empty()) throw InvalidArgument("diagonal cycle is empty");
    for (const auto& d : diagonal_cycle)
        if (is_zero(d) || magnitude(d) > 1.0) throw InvalidArgument("diagonal values need 0 < |d| <= 1");
    SeqSpaceModel<T> m;
    m.gamma = GradedIndex(k);
    m.max_grade = m.gamma.grade_for_dimension(N);
    m.N = N;
    m.slack = magnitude(slack);
    if (m.slack < 1.0) throw InvalidArgument("slack must be >= 1");
    m.diagonal.resize(N);
    for (std::size_t i = 0; i < N; ++i) m.diagonal[i] = diagonal_cycle[i % diagonal_cycle.size()];

    const std::size_t G = m.max_grade;
    // eps_m over grade m+1; every such grade is complete inside the truncation
    std::vector<T> eps_exact;
    for (std::size_t g = 1; g <= G; ++g) {
        std::size_t at = m.gamma.count_up_to(g - 1);
        T best = detail::field_abs(m.diagonal[at]);
        for (; at < m.gamma.count_up_to(g); ++at)
            if (magnitude(m.diagonal[at]) < magnitude(best)) best = detail::field_abs(m.diagonal[at]);
        eps_exact.push_back(best);
        m.eps.push_back(magnitude(best));
    }
    m.log_alpha = build_alpha_sequence(m.eps, G, m.slack);

    T pow2 = T(1);
    for (std::size_t g = 0; g < G; ++g) {
        m.alpha_ratio.push_back(eps_exact[g] / (slack * pow2));
        pow2 *= T(2);
    }

    for (std::size_t j = 0; j < k; ++j) m.A.emplace_back(N);
    for (std::size_t idx = 0; idx < N; ++idx) {
        auto n = m.gamma.inverse(idx);
        const std::size_t g = grade(n);
        if (g + 1 > G) continue;
        for (std::size_t j = 0; j < k; ++j) {
            ++n[j];
            const std::size_t src = m.gamma.forward(n);
            --n[j];
            const T ratio = m.alpha_ratio[g];
            m.A[j].add(idx, src, ratio);
            m.coeffs.push_back({j, idx, src, g, T(ratio / m.diagonal[src])});
        }
    }
    return m;
}

/// The A_j operators of a built model.
template <Field T>
const std::vector<SparseOperator<T>>& build_A_operators(const SeqSpaceModel<T>& m) {
    return m.A;
}

/// T x = sum_n a_n f_{alpha(n)}(x) x_{beta(n)} on the model's basis.
template <Field T>
SparseOperator<T> build_operator_from_series(const SeqSpaceModel<T>& m, std::span<const T> a,
                                             std::span<const std::size_t> alpha_map,
                                             std::span<const std::size_t> beta_map) {
    if (alpha_map.size() != a.size() || beta_map.size() != a.size())
        throw InvalidArgument("index maps must match the coefficient count");
    SparseOperator<T> op(m.N);
    for (std::size_t n = 0; n < a.size(); ++n) {
        if (alpha_map[n] >= m.N || beta_map[n] >= m.N) throw IndexOutOfRange("series index outside the truncation");
        op.add(beta_map[n], alpha_map[n], a[n] * m.diagonal[alpha_map[n]]);
    }
    return op;
}

/// Largest q(Tx) / p(x) over the samples; the series bound says <= ||a||_1.
template <Field T>
double series_bound_ratio(const SeqSpaceModel<T>& m, const SparseOperator<T>& op,
                          const std::vector<Vector<T>>& samples) {
    double worst = 0.0;
    for (const auto& x : samples) {
        const double px = m.p(x);
        if (px == 0.0) continue;
        const auto tx = op.apply(x);
        worst = std::max(worst, m.q(tx) / px);
    }
    return worst;
}

/// Strictness report for 0 < |c_{j,n}| < 2^{-|n|}: the largest |c| 2^{|n|}.
template <Field T>
double max_scaled_coefficient(const SeqSpaceModel<T>& m) {
    double worst = 0.0;
    for (const auto& c : m.coeffs)
        worst = std::max(worst, magnitude(c.value) * std::ldexp(1.0, static_cast<int>(c.grade)));
    return worst;
}

// ---------------------------------------------------------------------------
// The group e^{<z,A>}

template <Field T>
struct GroupApply {
    Vector<T> value;
    double tail_bound = 0.0; ///< certified bound on q(true - value)
    std::size_t terms = 0;   ///< highest power of <z,A> summed
    bool exact = false;      ///< series ran past nilpotency
};

/// sum_{i > m} s^i / i!, evaluated term by term in log space. May be +inf.
inline double exp_tail(double s, std::size_t m) {
    if (s <= 0.0) return 0.0;
    const double ls = std::log(s);
    double sum = 0.0;
    for (std::size_t i = m + 1;; ++i) {
        const double term = std::exp(static_cast<double>(i) * ls - std::lgamma(static_cast<double>(i) + 1.0));
        if (!std::isfinite(term)) return std::numeric_limits<double>::infinity();
        sum += term;
        if (static_cast<double>(i) > 2.0 * s && term <= 1e-18 * sum) break;
        if (sum == 0.0 && static_cast<double>(i) > 2.0 * s) break;
    }
    return sum;
}

/// e^{<z,A>} x summed as powers of <z,A>. Each step checks the majorant
/// q(tail) <= (p(x)/c) sum_{i>m} (a c ||z||_1)^i / i!; the truncated model is
/// nilpotent of order G+1, so the loop always ends. Rational input is summed
/// to nilpotency and is exact.
template <Field T>
GroupApply<T> exp_group_apply(const SeqSpaceModel<T>& m, std::span<const T> z, std::span<const T> x,
                              double tol = 1e-12) {
    if (z.size() != m.k()) throw InvalidArgument("z must have k entries");
    if (x.size() != m.N) throw InvalidArgument("x must have N entries");
    if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
    double znorm = 0.0;
    for (const auto& zj : z) znorm += magnitude(zj);
    const double s = m.a() * m.c() * znorm;
    const double lead = m.p(x) / m.c();

    GroupApply<T> out;
    out.value.assign(x.begin(), x.end());
    Vector<T> term(x.begin(), x.end());
    for (std::size_t i = 1; i <= m.max_grade; ++i) {
        if constexpr (!is_rational_v<T>) {
            const double bound = lead * exp_tail(s, i - 1);
            if (bound < tol) {
                out.tail_bound = bound;
                return out;
            }
        }
        Vector<T> next(m.N, T(0));
        for (std::size_t j = 0; j < m.k(); ++j) {
            if (is_zero(z[j])) continue;
            next = axpy(T(z[j]), m.A[j].apply(term), std::move(next));
        }
        const T inv = T(1) / T(static_cast<long long>(i));
        for (auto& v : next) v *= inv;
        term = std::move(next);
        out.value = axpy(T(1), term, std::move(out.value));
        out.terms = i;
    }
    out.exact = true;
    out.tail_bound = 0.0;
    return out;
}

template <Field T>
GroupApply<T> exp_group_apply(const SeqSpaceModel<T>& m, const Vector<T>& z, const Vector<T>& x, double tol = 1e-12) {
    return exp_group_apply(m, std::span<const T>(z), std::span<const T>(x), tol);
}

/// Right-hand side of q(e^{<z,A>}x - x) <= (p(x)/c)(e^{ac||z||} - 1).
template <Field T>
double continuity_bound(const SeqSpaceModel<T>& m, std::span<const T> z, std::span<const T> x) {
    double znorm = 0.0;
    for (const auto& zj : z) znorm += magnitude(zj);
    return m.p(x) / m.c() * std::expm1(m.a() * m.c() * znorm);
}

// ---------------------------------------------------------------------------
// Analyticity probe

struct CauchyRiemannProbe {
    std::vector<double> h;
    std::vector<double> residual; ///< |D_y g - i D_x g| at each h
    std::vector<double> ratio;    ///< residual[i-1] / residual[i]
};

/// For g(w) = f_coord(e^{<z0 + w e_axis, A>} x) compares central differences
/// along the real and imaginary directions at w = 0. Analytic g gives a
/// residual of h^2 |g'''| / 3 + O(h^4).
inline CauchyRiemannProbe cauchy_riemann_probe(const SeqSpaceModel<Complex>& m, const Vector<Complex>& z0,
                                               const Vector<Complex>& x, std::size_t coord, std::size_t axis,
                                               double h0, std::size_t halvings) {
    if (coord >= m.N || axis >= m.k()) throw IndexOutOfRange("probe coordinate or axis out of range");
    auto g = [&](Complex w) {
        auto z = z0;
        z[axis] += w;
        return m.diagonal[coord] * exp_group_apply(m, z, x, 1e-300).value[coord];
    };
    CauchyRiemannProbe out;
    double h = h0;
    for (std::size_t s = 0; s <= halvings; ++s, h /= 2.0) {
        const Complex dx = (g(Complex(h, 0)) - g(Complex(-h, 0))) / (2.0 * h);
        const Complex dy = (g(Complex(0, h)) - g(Complex(0, -h))) / (2.0 * h);
        out.h.push_back(h);
        out.residual.push_back(std::abs(dy - Complex(0, 1) * dx));
        if (s > 0) out.ratio.push_back(out.residual[s - 1] / out.residual[s]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// KER density

struct KerDensityReport {
    std::size_t N = 0;
    std::size_t ambient_N = 0;
    std::size_t rank = 0;
    std::size_t indices_checked = 0;
    bool dense = false;
};

/// Spans the union of kappa(m, A) = A^m (cap_j ker A_j^{2 m_j}) over every m
/// with m_j >= 1 and E_m inside the kept grades, restricted to the first N
/// coordinates. Kernels are taken in an ambient model of grade 2G + k so the
/// preimages exist; A lowers grades, so that model restricts exactly.
inline KerDensityReport ker_density_check(std::size_t k, std::size_t max_grade,
                                          const std::vector<Rational>& diagonal_cycle,
                                          const Rational& slack = Rational(1)) {
    const GradedIndex gamma(k);
    const std::size_t N = gamma.count_up_to(max_grade);
    const std::size_t ambient_grade = 2 * max_grade + k;
    const auto amb = build_model<Rational>(k, gamma.count_up_to(ambient_grade), diagonal_cycle, slack);
    const std::size_t D = amb.N;

    std::vector<Matrix<Rational>> ops;
    for (const auto& a : amb.A) ops.push_back(a.dense());

    KerDensityReport rep;
    rep.N = N;
    rep.ambient_N = D;
    std::vector<Vector<Rational>> collected;

    // in range: every n <= m - 1 has grade <= G, i.e. |m| <= G + k
    MultiIndex mi(k, 1);
    for (;;) {
        if (grade(mi) <= max_grade + k) {
            ++rep.indices_checked;
            Matrix<Rational> stacked(k * D, D);
            for (std::size_t j = 0; j < k; ++j) {
                Matrix<Rational> p = Matrix<Rational>::identity(D);
                for (std::size_t s = 0; s < 2 * mi[j]; ++s) p = ops[j] * p;
                for (std::size_t r = 0; r < D; ++r)
                    for (std::size_t c = 0; c < D; ++c) stacked(j * D + r, c) = p(r, c);
            }
            for (auto v : nullspace(std::move(stacked))) {
                for (std::size_t j = 0; j < k; ++j)
                    for (std::size_t s = 0; s < mi[j]; ++s) v = ops[j] * v;
                bool inside = true;
                for (std::size_t i = N; i < D; ++i)
                    if (!is_zero(v[i])) inside = false;
                if (!inside) continue;
                v.resize(N);
                collected.push_back(std::move(v));
            }
        }
        // odometer over m_j in 1..G+1
        std::size_t j = 0;
        while (j < k && ++mi[j] > max_grade + 1) mi[j++] = 1;
        if (j == k) break;
    }
    rep.rank = rank_of(std::move(collected));
    rep.dense = rep.rank == N;
    return rep;
}

} // namespace hypermix::seqspace
