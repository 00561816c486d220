#pragma once

// Cell-centred grid models of L_p([0,1]^k) and L_0(R^k).
//
// A field is a row-major array of real samples on an axis-aligned box. R^k is
// modelled by a finite box that grows when a translate would leave it; cells
// outside the box are zero. Pullbacks that are not grid aligned use
// multilinear interpolation between cell centres.

#include "hypermix/errors.hpp"
#include "hypermix/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace hypermix::lp {

struct Axis {
    std::size_t n = 8; ///< cells
    double lo = 0.0;   ///< left edge
    double h = 0.125;  ///< cell width

    double hi() const { return lo + h * static_cast<double>(n); }
    double center(std::size_t i) const { return lo + h * (static_cast<double>(i) + 0.5); }
    bool operator==(const Axis&) const = default;
};

class GridField {
public:
    GridField() = default;

    explicit GridField(std::vector<Axis> axes) : axes_(std::move(axes)) {
        if (axes_.empty()) throw InvalidArgument("field needs at least one axis");
        std::size_t total = 1;
        for (const auto& a : axes_) {
            if (a.n < 8) throw InvalidArgument("resolution must be at least 8 per axis");
            if (!(a.h > 0.0)) throw InvalidArgument("extent must be positive");
            total *= a.n;
        }
        values_.assign(total, 0.0);
    }

    /// [0,1]^k with n cells per axis.
    static GridField unit_cube(std::size_t k, std::size_t n) {
        return GridField(std::vector<Axis>(k, Axis{n, 0.0, 1.0 / static_cast<double>(n)}));
    }

    /// [-half_width, half_width]^k with `per_unit` cells per unit length.
    static GridField centered_box(std::size_t k, double half_width, std::size_t per_unit) {
        const auto n = static_cast<std::size_t>(std::llround(2.0 * half_width * static_cast<double>(per_unit)));
        return GridField(std::vector<Axis>(k, Axis{n, -half_width, 1.0 / static_cast<double>(per_unit)}));
    }

    template <typename F>
    static GridField sample(std::vector<Axis> axes, F&& f) {
        GridField g(std::move(axes));
        std::vector<double> x(g.k());
        for (std::size_t c = 0; c < g.size(); ++c) {
            g.center_of(c, x);
            g.values_[c] = f(x);
        }
        return g;
    }

    std::size_t k() const noexcept { return axes_.size(); }
    std::size_t size() const noexcept { return values_.size(); }
    const std::vector<Axis>& axes() const noexcept { return axes_; }
    const Axis& axis(std::size_t j) const { return axes_.at(j); }
    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double& operator[](std::size_t c) { return values_[c]; }
    double operator[](std::size_t c) const { return values_[c]; }

    double cell_volume() const {
        double v = 1.0;
        for (const auto& a : axes_) v *= a.h;
        return v;
    }

    std::size_t stride(std::size_t j) const {
        std::size_t s = 1;
        for (std::size_t i = j + 1; i < axes_.size(); ++i) s *= axes_[i].n;
        return s;
    }

    void index_of(std::size_t c, std::vector<std::size_t>& idx) const {
        idx.resize(k());
        for (std::size_t j = k(); j-- > 0;) {
            idx[j] = c % axes_[j].n;
            c /= axes_[j].n;
        }
    }

    void center_of(std::size_t c, std::vector<double>& x) const {
        x.resize(k());
        for (std::size_t j = k(); j-- > 0;) {
            x[j] = axes_[j].center(c % axes_[j].n);
            c /= axes_[j].n;
        }
    }

    bool same_grid(const GridField& o) const { return axes_ == o.axes_; }

    /// Multilinear interpolation between cell centres, zero outside the box.
    /// Within half a cell of the box edge the edge value is held.
    double at(const std::vector<double>& x) const {
        std::vector<std::size_t> i0(k());
        std::vector<double> w(k());
        std::vector<bool> two(k());
        for (std::size_t j = 0; j < k(); ++j) {
            const auto& a = axes_[j];
            if (x[j] < a.lo || x[j] > a.hi()) return 0.0;
            const double u = (x[j] - a.lo) / a.h - 0.5;
            if (u <= 0.0) {
                i0[j] = 0, w[j] = 0.0, two[j] = false;
            } else if (u >= static_cast<double>(a.n - 1)) {
                i0[j] = a.n - 1, w[j] = 0.0, two[j] = false;
            } else {
                const double fl = std::floor(u);
                i0[j] = static_cast<std::size_t>(fl);
                w[j] = u - fl;
                two[j] = w[j] > 0.0;
            }
        }
        double acc = 0.0;
        const std::size_t corners = std::size_t{1} << k();
        for (std::size_t m = 0; m < corners; ++m) {
            double wt = 1.0;
            std::size_t c = 0;
            bool skip = false;
            for (std::size_t j = 0; j < k() && !skip; ++j) {
                const bool up = (m >> j) & 1u;
                if (up && !two[j]) skip = true;
                wt *= up ? w[j] : 1.0 - w[j];
                c += (i0[j] + (up ? 1 : 0)) * stride(j);
            }
            if (!skip && wt != 0.0) acc += wt * values_[c];
        }
        return acc;
    }

    /// Bounding box of the nonzero cells as (lo, hi) per axis; nullopt when zero.
    std::optional<std::vector<std::pair<double, double>>> support() const {
        std::vector<std::pair<double, double>> box(k(), {std::numeric_limits<double>::infinity(),
                                                         -std::numeric_limits<double>::infinity()});
        bool any = false;
        std::vector<std::size_t> idx;
        for (std::size_t c = 0; c < size(); ++c) {
            if (values_[c] == 0.0) continue;
            any = true;
            index_of(c, idx);
            for (std::size_t j = 0; j < k(); ++j) {
                const auto& a = axes_[j];
                box[j].first = std::min(box[j].first, a.lo + a.h * static_cast<double>(idx[j]));
                box[j].second = std::max(box[j].second, a.lo + a.h * static_cast<double>(idx[j] + 1));
            }
        }
        if (!any) return std::nullopt;
        return box;
    }

private:
    std::vector<Axis> axes_;
    std::vector<double> values_;
};

/// Copies `f` onto a lattice-aligned box containing it, zero filled.
inline GridField embed(const GridField& f, const std::vector<Axis>& target) {
    if (target.size() != f.k()) throw GridMismatch("dimension differs");
    std::vector<long long> off(f.k());
    for (std::size_t j = 0; j < f.k(); ++j) {
        const auto& a = f.axis(j);
        const auto& b = target[j];
        const double s = (a.lo - b.lo) / a.h;
        off[j] = std::llround(s);
        if (a.h != b.h || std::abs(s - static_cast<double>(off[j])) > 1e-9 || off[j] < 0 ||
            static_cast<std::size_t>(off[j]) + a.n > b.n)
            throw GridMismatch("target box is not a lattice-aligned superset");
    }
    GridField g(target);
    std::vector<std::size_t> idx;
    for (std::size_t c = 0; c < f.size(); ++c) {
        if (f[c] == 0.0) continue;
        f.index_of(c, idx);
        std::size_t d = 0;
        for (std::size_t j = 0; j < f.k(); ++j) d += (idx[j] + static_cast<std::size_t>(off[j])) * g.stride(j);
        g[d] = f[c];
    }
    return g;
}

/// Smallest lattice-aligned box holding both fields (same spacing required).
inline std::vector<Axis> union_axes(const GridField& a, const GridField& b) {
    if (a.k() != b.k()) throw GridMismatch("dimension differs");
    std::vector<Axis> out(a.k());
    for (std::size_t j = 0; j < a.k(); ++j) {
        const auto& x = a.axis(j);
        const auto& y = b.axis(j);
        const double s = (y.lo - x.lo) / x.h;
        if (x.h != y.h || std::abs(s - std::round(s)) > 1e-9) throw GridMismatch("lattices are not aligned");
        const long long lo = std::min(0LL, std::llround(s));
        const long long hi = std::max(static_cast<long long>(x.n), std::llround(s) + static_cast<long long>(y.n));
        out[j] = Axis{static_cast<std::size_t>(hi - lo), x.lo + static_cast<double>(lo) * x.h, x.h};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metrics

/// p in (0,1): q_p(f) = integral of |f|^p. p = 0: the weighted window sum
/// q_0(f) = sum_n 2^{-n}/mu(Omega_n) * integral over Omega_n of |f|/(1+|f|)
/// with Omega_n = [-n-1, n+1]^k for n = 0..max_window.
struct LpMetric {
    double p = 0.5;
    std::size_t max_window = 60;

    static LpMetric q0(std::size_t max_window = 60) { return {0.0, max_window}; }

    void validate() const {
        if (!(p >= 0.0 && p < 1.0)) throw InvalidArgument("p must lie in [0, 1)");
    }

    double window_measure(std::size_t n, std::size_t k) const {
        return std::pow(2.0 * static_cast<double>(n + 1), static_cast<double>(k));
    }

    /// sum_{n >= n0} 2^{-n} / mu(Omega_n), the weight of a point first covered by Omega_{n0}.
    std::vector<double> tail_weights(std::size_t k) const {
        std::vector<double> w(max_window + 2, 0.0);
        for (std::size_t n = max_window + 1; n-- > 0;)
            w[n] = w[n + 1] + std::ldexp(1.0, -static_cast<int>(n)) / window_measure(n, k);
        return w;
    }

    /// The q-value of a single field.
    double q(const GridField& f) const {
        validate();
        const double vol = f.cell_volume();
        double acc = 0.0;
        if (p > 0.0) {
            for (double v : f.values()) acc += std::pow(std::abs(v), p);
            return acc * vol;
        }
        const auto w = tail_weights(f.k());
        std::vector<double> x;
        for (std::size_t c = 0; c < f.size(); ++c) {
            const double v = std::abs(f[c]);
            if (v == 0.0) continue;
            f.center_of(c, x);
            double r = 0.0;
            for (double xi : x) r = std::max(r, std::abs(xi));
            // first window containing the centre: n + 1 >= r
            const double n0 = std::max(0.0, std::ceil(r - 1.0));
            if (n0 > static_cast<double>(max_window)) continue;
            acc += w[static_cast<std::size_t>(n0)] * v / (1.0 + v);
        }
        return acc * vol;
    }

    /// Half-width beyond which the weights alone drop below eps: a function
    /// vanishing on [-R, R]^k with R >= n_eps = ceil(log2(2/eps)) is first seen
    /// by Omega_{n_eps}, so q_0 <= sum_{n >= n_eps} 2^{-n} <= eps.
    static double window_span(double eps) { return std::ceil(std::log2(2.0 / eps)); }
};

inline double metric_distance(const LpMetric& m, const GridField& f, const GridField& g) {
    if (!f.same_grid(g)) throw GridMismatch("fields live on different grids");
    GridField d(f.axes());
    for (std::size_t c = 0; c < f.size(); ++c) d[c] = f[c] - g[c];
    return m.q(d);
}

/// Distance after embedding both fields in their union box.
inline double metric_distance_aligned(const LpMetric& m, const GridField& f, const GridField& g) {
    if (f.same_grid(g)) return metric_distance(m, f, g);
    const auto ax = union_axes(f, g);
    return metric_distance(m, embed(f, ax), embed(g, ax));
}

// ---------------------------------------------------------------------------
// Dilations on the unit cube

inline void require_unit_cube(const GridField& f) {
    for (const auto& a : f.axes())
        if (a.lo != 0.0 || std::abs(a.hi() - 1.0) > 1e-12) throw InvalidArgument("dilation needs a unit-cube grid");
}

/// (T_j f)(x) = f(x with x_j replaced by x_j/2).
inline GridField dilation_apply(std::size_t j, const GridField& f) {
    require_unit_cube(f);
    if (j >= f.k()) throw IndexOutOfRange("axis " + std::to_string(j));
    GridField out(f.axes());
    std::vector<double> x;
    for (std::size_t c = 0; c < f.size(); ++c) {
        f.center_of(c, x);
        x[j] *= 0.5;
        out[c] = f.at(x);
    }
    return out;
}

inline GridField dilation_power(std::size_t j, std::size_t m, GridField f) {
    for (std::size_t i = 0; i < m; ++i) f = dilation_apply(j, f);
    return f;
}

struct DilationExp {
    GridField value;
    std::size_t terms = 0;
    double tail_bound = 0.0; ///< heuristic: uses an observed operator bound
    double observed_bound = 0.0;
    bool heuristic = true;
};

/// e^{<t,T>} f by its power series in the q_p quasi-norm. In L_p each T_j
/// has q_p(T_j g) = 2 q_p(g) on functions supported in [0,1/2] and at most 2
/// in general; the grid version only approximately keeps this, so the bound
/// used is the larger of 2 and the worst ratio seen while summing.
inline DilationExp dilation_exp_apply(const std::vector<double>& t, const GridField& f, const LpMetric& m,
                                      double tol = 1e-10, std::size_t max_terms = 200) {
    require_unit_cube(f);
    if (t.size() != f.k()) throw InvalidArgument("parameter length must match the dimension");
    if (!(m.p > 0.0)) throw InvalidArgument("the dilation group lives on L_p with p > 0");
    DilationExp out{f, 0, 0.0, 2.0, true};
    const double q0 = m.q(f);
    if (q0 == 0.0) return out;
    GridField term = f;
    double lfac = 0.0; // log n!
    for (std::size_t n = 1; n <= max_terms; ++n) {
        GridField next(f.axes());
        for (std::size_t j = 0; j < f.k(); ++j) {
            if (t[j] == 0.0) continue;
            const auto tj = dilation_apply(j, term);
            const double qt = m.q(term);
            if (qt > 0.0) out.observed_bound = std::max(out.observed_bound, m.q(tj) / qt);
            for (std::size_t c = 0; c < f.size(); ++c) next[c] += t[j] * tj[c];
        }
        for (auto& v : next.values()) v /= static_cast<double>(n);
        term = std::move(next);
        for (std::size_t c = 0; c < f.size(); ++c) out.value[c] += term[c];
        out.terms = n;
        lfac += std::log(static_cast<double>(n));
        // q_p(<t,T> g) <= rho q_p(g) with rho = L * sum |t_j|^p, so the
        // remaining terms are bounded by sum_{i>n} rho^i / (i!)^p * q_p(f).
        double rho = 0.0;
        for (double tj : t) rho += std::pow(std::abs(tj), m.p);
        rho *= std::max(2.0, out.observed_bound);
        double tail = 0.0, lf = lfac;
        for (std::size_t i = n + 1; i <= n + 400; ++i) {
            lf += std::log(static_cast<double>(i));
            const double term_i = std::exp(static_cast<double>(i) * std::log(rho) - m.p * lf);
            tail += term_i;
            if (term_i < 1e-300 || (i > n + 5 && term_i < tail * 1e-17)) break;
        }
        out.tail_bound = tail * q0;
        if (out.tail_bound <= tol) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Density of the kernel space of the dilation tuple

struct KernelProbeEntry {
    double delta = 0.0;        ///< cleared slabs are {x_j < delta}
    std::size_t m = 0;         ///< delta = 2^{-m}
    double distance = 0.0;     ///< d_p(f, f~)
    double bound = 0.0;        ///< k * delta * sup|f|^p, an a priori bound on the distance
    std::size_t power_exact = 0;  ///< T_j^power_exact f~ = 0 in L_p for every j
    std::size_t power_grid = 0;   ///< first power annihilating f~ on the grid, every axis
    bool annihilated = false;
    bool resolved = false;     ///< delta spans at least two cells
};

struct KernelProbeReport {
    double p = 0.5;
    double eps = 1e-3;
    std::vector<KernelProbeEntry> entries;
    bool all_ok() const {
        return std::all_of(entries.begin(), entries.end(),
                           [&](const auto& e) { return e.distance < eps && e.annihilated && e.resolved; });
    }
};

/// For each target f, zeroes f on the union of slabs {x_j < delta}, with
/// delta = 2^{-m} the largest power whose computed d_p(f, f~) is below eps.
/// The cleared field lies in ker T_j^m for every j, hence in the kernel
/// space of the tuple, and is within eps of f.
inline KernelProbeReport kernel_density_probe(const std::vector<GridField>& targets, double eps, double p = 0.5,
                                              std::size_t max_power = 64) {
    KernelProbeReport rep{p, eps, std::vector<KernelProbeEntry>(targets.size())};
    const LpMetric metric{p};
    metric.validate();
    parallel_for(targets.size(), [&](std::size_t i) {
        const auto& f = targets[i];
        require_unit_cube(f);
        auto& e = rep.entries[i];
        double sup = 0.0;
        for (double v : f.values()) sup = std::max(sup, std::abs(v));
        if (!std::isfinite(sup)) throw InvalidArgument("target must be bounded");
        if (sup == 0.0) {
            e.resolved = e.annihilated = true;
            return;
        }
        double hmax = 0.0;
        for (const auto& a : f.axes()) hmax = std::max(hmax, a.h);
        auto clear = [&](double delta) {
            GridField g = f;
            std::vector<double> x;
            for (std::size_t c = 0; c < g.size(); ++c) {
                g.center_of(c, x);
                if (std::any_of(x.begin(), x.end(), [&](double xi) { return xi < delta; })) g[c] = 0.0;
            }
            return g;
        };
        // largest delta = 2^{-m} whose cleared field is within eps; stop once
        // delta is no longer resolved by the grid
        GridField g;
        for (e.m = 1;; ++e.m) {
            e.delta = std::ldexp(1.0, -static_cast<int>(e.m));
            g = clear(e.delta);
            e.distance = metric_distance(metric, f, g);
            if (e.distance < eps || e.delta < 2.0 * hmax) break;
        }
        e.resolved = e.delta >= 2.0 * hmax;
        e.bound = static_cast<double>(f.k()) * std::pow(sup, p) * e.delta;
        e.power_exact = e.m;
        // Interpolation smears the slab edge by a cell, so the grid may need one
        // more halving than the exact count.
        e.power_grid = 0;
        for (std::size_t j = 0; j < g.k(); ++j) {
            GridField h = g;
            std::size_t pw = 0;
            while (pw < max_power && std::any_of(h.values().begin(), h.values().end(), [](double v) { return v != 0.0; })) {
                h = dilation_apply(j, h);
                ++pw;
            }
            e.power_grid = std::max(e.power_grid, pw);
        }
        e.annihilated = e.power_grid <= e.power_exact + 1;
    });
    return rep;
}

// ---------------------------------------------------------------------------
// Translations on R^k

enum class EdgePolicy {
    extend,    ///< grow the box to hold the translate
    zero_fill, ///< keep the box, drop what leaves it
    strict     ///< SupportEscape if anything would leave the box
};

/// (T_t f)(x) = f(x - t). Grid-aligned shifts move samples exactly; other
/// shifts interpolate the fractional part.
inline GridField translate(const GridField& f, const std::vector<double>& t, EdgePolicy policy = EdgePolicy::extend) {
    if (t.size() != f.k()) throw InvalidArgument("shift length must match the dimension");
    std::vector<Axis> target = f.axes();
    const auto sup = f.support();
    if (!sup) return GridField(target);
    bool leaves = false;
    for (std::size_t j = 0; j < f.k(); ++j) {
        auto& a = target[j];
        const double lo = (*sup)[j].first + t[j], hi = (*sup)[j].second + t[j];
        const double eps = 1e-9 * a.h;
        if (lo < a.lo - eps || hi > a.hi() + eps) leaves = true;
        if (policy == EdgePolicy::extend) {
            const double grow_lo = std::max(0.0, std::ceil((a.lo - lo) / a.h - 1e-9));
            const double grow_hi = std::max(0.0, std::ceil((hi - a.hi()) / a.h - 1e-9));
            a.lo -= grow_lo * a.h;
            a.n += static_cast<std::size_t>(grow_lo + grow_hi);
        }
    }
    if (leaves && policy == EdgePolicy::strict) throw SupportEscape("translate leaves the box");

    bool aligned = true;
    std::vector<long long> shift(f.k());
    for (std::size_t j = 0; j < f.k(); ++j) {
        const double s = t[j] / f.axis(j).h;
        shift[j] = std::llround(s);
        if (std::abs(s - static_cast<double>(shift[j])) > 1e-9) aligned = false;
    }
    GridField out(target);
    if (aligned) {
        std::vector<std::size_t> idx;
        for (std::size_t c = 0; c < f.size(); ++c) {
            if (f[c] == 0.0) continue;
            f.index_of(c, idx);
            std::size_t d = 0;
            bool inside = true;
            for (std::size_t j = 0; j < f.k(); ++j) {
                const double off = (f.axis(j).lo - target[j].lo) / f.axis(j).h;
                const long long ij = static_cast<long long>(idx[j]) + std::llround(off) + shift[j];
                if (ij < 0 || ij >= static_cast<long long>(target[j].n)) {
                    inside = false;
                    break;
                }
                d += static_cast<std::size_t>(ij) * out.stride(j);
            }
            if (inside) out[d] = f[c];
        }
        return out;
    }
    std::vector<double> x;
    for (std::size_t c = 0; c < out.size(); ++c) {
        out.center_of(c, x);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] -= t[j];
        out[c] = f.at(x);
    }
    return out;
}

/// exp(1 - 1/(1-|x|^2)) on the unit ball, peak 1 at the origin.
inline double standard_bump(const std::vector<double>& x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
}

inline GridField bump_field(std::size_t k, double half_width, std::size_t per_unit) {
    auto box = GridField::centered_box(k, half_width, per_unit);
    return GridField::sample(box.axes(), standard_bump);
}

struct TranslationRow {
    double magnitude = 0.0;
    double forward = 0.0;  ///< d_0(T_t f, 0)
    double backward = 0.0; ///< d_0(T_{-t} f, 0)
};

struct TranslationReport {
    double eps = 1e-3;
    double span = 0.0;     ///< sqrt(k) * (window span + sup-norm support radius)
    std::vector<TranslationRow> rows;
    std::vector<double> continuity; ///< d_0(T_s f, T_t f) as |s - t| halves
    bool beyond_span_ok = false;    ///< every row with magnitude > span is below eps both ways
    bool decreasing = false;        ///< forward distances non-increasing in the row order
    bool continuity_monotone = false;
};

struct TranslationOptions {
    double eps = 1e-3;
    std::vector<double> continuity_base; ///< t for the continuity check; empty means zero
    double continuity_step = 0.5;
    std::size_t halvings = 6;
    EdgePolicy policy = EdgePolicy::extend;
};

/// Checks T_{t_n} f -> 0 and T_{-t_n} f -> 0 in d_0 along the sequence, and
/// strong continuity d_0(T_s f, T_t f) -> 0 as s -> t.
inline TranslationReport translation_group_check(const std::vector<std::vector<double>>& t_seq, const GridField& f,
                                                 const TranslationOptions& opt = {}) {
    const auto metric = LpMetric::q0();
    TranslationReport rep;
    rep.eps = opt.eps;
    double radius = 0.0;
    if (const auto sup = f.support())
        for (const auto& [lo, hi] : *sup) radius = std::max({radius, std::abs(lo), std::abs(hi)});
    rep.span = std::sqrt(static_cast<double>(f.k())) * (LpMetric::window_span(opt.eps) + radius);
    rep.rows.resize(t_seq.size());
    parallel_for(t_seq.size(), [&](std::size_t i) {
        const auto& t = t_seq[i];
        std::vector<double> neg(t.size());
        double mag = 0.0;
        for (std::size_t j = 0; j < t.size(); ++j) {
            neg[j] = -t[j];
            mag += t[j] * t[j];
        }
        rep.rows[i] = {std::sqrt(mag), metric.q(translate(f, t, opt.policy)), metric.q(translate(f, neg, opt.policy))};
    });
    rep.beyond_span_ok = true;
    rep.decreasing = true;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        if (r.magnitude > rep.span && !(r.forward < opt.eps && r.backward < opt.eps)) rep.beyond_span_ok = false;
        if (i > 0 && r.forward > rep.rows[i - 1].forward) rep.decreasing = false;
    }

    std::vector<double> base = opt.continuity_base.empty() ? std::vector<double>(f.k(), 0.0) : opt.continuity_base;
    const auto tf = translate(f, base, EdgePolicy::extend);
    rep.continuity.resize(opt.halvings + 1);
    parallel_for(opt.halvings + 1, [&](std::size_t i) {
        auto s = base;
        const double step = std::ldexp(opt.continuity_step, -static_cast<int>(i));
        for (auto& v : s) v += step;
        rep.continuity[i] = metric_distance_aligned(metric, translate(f, s, EdgePolicy::extend), tf);
    });
    rep.continuity_monotone = true;
    for (std::size_t i = 1; i < rep.continuity.size(); ++i)
        if (!(rep.continuity[i] < rep.continuity[i - 1])) rep.continuity_monotone = false;
    return rep;
}

} // namespace hypermix::lp
