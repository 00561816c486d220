#pragma once

// Symbol-set tests for adjoint multipliers on the Hardy space H^2.
//
// M_alpha^* is hereditarily hypercyclic when alpha(D) meets the unit circle
// and non-hypercyclic when it misses it (alpha non-constant). Everything here
// works from sampled images: a polynomial symbol is evaluated on a polar grid
// of the closed disk, a sampled symbol carries its image points directly.
// The U/V domains are the triangle and lens whose images under z -> 1+z and
// z -> e^z split the four operators I+A, e^A, I+B, e^B.

#include "hypermix/dense.hpp"
#include "hypermix/errors.hpp"
#include "hypermix/scalar.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace hypermix::gallery {

/// Either Taylor coefficients at 0 or a list of (point, alpha(point)) samples.
class Symbol {
public:
    enum class Kind { polynomial, sampled };

    static Symbol polynomial(std::vector<Complex> coeffs) {
        if (coeffs.empty()) throw InvalidArgument("polynomial symbol needs coefficients");
        while (coeffs.size() > 1 && coeffs.back() == Complex(0)) coeffs.pop_back();
        Symbol s;
        s.kind_ = Kind::polynomial;
        s.coeffs_ = std::move(coeffs);
        return s;
    }

    static Symbol sampled(std::vector<std::pair<Complex, Complex>> samples, bool declared_bounded = true) {
        if (samples.empty()) throw InvalidArgument("sampled symbol needs samples");
        Symbol s;
        s.kind_ = Kind::sampled;
        s.samples_ = std::move(samples);
        s.bounded_ = declared_bounded;
        return s;
    }

    Kind kind() const noexcept { return kind_; }
    bool declared_bounded() const noexcept { return bounded_; }
    const std::vector<Complex>& coeffs() const { return coeffs_; }
    const std::vector<std::pair<Complex, Complex>>& samples() const { return samples_; }

    std::size_t degree() const {
        if (kind_ != Kind::polynomial) throw InvalidArgument("degree of a sampled symbol");
        return coeffs_.size() - 1;
    }

    bool is_constant() const {
        if (kind_ == Kind::polynomial) return coeffs_.size() == 1;
        return std::all_of(samples_.begin(), samples_.end(),
                           [&](const auto& s) { return s.second == samples_.front().second; });
    }

    Complex operator()(Complex z) const {
        if (kind_ != Kind::polynomial) throw InvalidArgument("pointwise evaluation needs a polynomial symbol");
        Complex acc(0);
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
        return acc;
    }

    /// Composes the image with a scalar map; for sampled symbols only the values move.
    template <typename F>
    Symbol map_values(F&& f) const {
        if (kind_ != Kind::sampled) throw InvalidArgument("map_values applies to sampled symbols");
        auto out = samples_;
        for (auto& s : out) s.second = f(s.second);
        return sampled(std::move(out), bounded_);
    }

private:
    Kind kind_ = Kind::polynomial;
    std::vector<Complex> coeffs_;
    std::vector<std::pair<Complex, Complex>> samples_;
    bool bounded_ = true;
};

// ---------------------------------------------------------------------------
// Domains

class PlaneDomain {
public:
    enum class Kind { triangle_U, lens_V, disk, polygon };

    static PlaneDomain triangle_U() { return PlaneDomain(Kind::triangle_U); }
    static PlaneDomain lens_V() { return PlaneDomain(Kind::lens_V); }
    static PlaneDomain disk(Complex center, double radius) {
        if (!(radius > 0.0)) throw InvalidArgument("disk radius must be positive");
        PlaneDomain d(Kind::disk);
        d.center_ = center;
        d.radius_ = radius;
        return d;
    }
    static PlaneDomain polygon(std::vector<Complex> vertices) {
        if (vertices.size() < 3) throw InvalidArgument("polygon needs at least three vertices");
        PlaneDomain d(Kind::polygon);
        d.vertices_ = std::move(vertices);
        return d;
    }

    Kind kind() const noexcept { return kind_; }
    Complex offset() const noexcept { return offset_; }

    /// The same domain translated by `by`.
    PlaneDomain shifted(Complex by) const {
        PlaneDomain d = *this;
        d.offset_ += by;
        return d;
    }

    /// Exact evaluation of the defining strict inequalities.
    bool contains(Complex p) const {
        p -= offset_;
        const double a = p.real(), b = p.imag();
        switch (kind_) {
        case Kind::triangle_U: return a < 0.0 && b - a < 1.0 && b + a > -1.0;
        case Kind::lens_V: return 0.0 < b && b < 1.0 && std::abs(a) < 1.0 - std::sqrt(1.0 - b * b);
        case Kind::disk: return std::abs(p - center_) < radius_;
        case Kind::polygon: {
            bool in = false;
            const std::size_t n = vertices_.size();
            for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
                const Complex vi = vertices_[i], vj = vertices_[j];
                if ((vi.imag() > b) != (vj.imag() > b)) {
                    const double x = vj.real() + (b - vj.imag()) * (vi.real() - vj.real()) / (vi.imag() - vj.imag());
                    if (a < x) in = !in;
                }
            }
            return in;
        }
        }
        return false;
    }

    /// Axis-aligned box containing the domain: (re_lo, re_hi, im_lo, im_hi).
    std::array<double, 4> bounding_box() const {
        std::array<double, 4> box{};
        switch (kind_) {
        case Kind::triangle_U: box = {-1.0, 0.0, -1.0, 1.0}; break;
        case Kind::lens_V: box = {-1.0, 1.0, 0.0, 1.0}; break;
        case Kind::disk:
            box = {center_.real() - radius_, center_.real() + radius_, center_.imag() - radius_,
                   center_.imag() + radius_};
            break;
        case Kind::polygon: {
            box = {vertices_[0].real(), vertices_[0].real(), vertices_[0].imag(), vertices_[0].imag()};
            for (const auto& v : vertices_) {
                box[0] = std::min(box[0], v.real());
                box[1] = std::max(box[1], v.real());
                box[2] = std::min(box[2], v.imag());
                box[3] = std::max(box[3], v.imag());
            }
            break;
        }
        }
        box[0] += offset_.real();
        box[1] += offset_.real();
        box[2] += offset_.imag();
        box[3] += offset_.imag();
        return box;
    }

private:
    explicit PlaneDomain(Kind k) : kind_(k) {}

    Kind kind_;
    Complex center_{0.0};
    double radius_ = 1.0;
    std::vector<Complex> vertices_;
    Complex offset_{0.0};
};

inline bool domain_membership(const PlaneDomain& d, Complex p) { return d.contains(p); }

/// Uniform samples of a domain by rejection from its bounding box.
inline std::vector<Complex> sample_domain(const PlaneDomain& d, std::size_t count, std::mt19937_64& rng) {
    const auto box = d.bounding_box();
    std::uniform_real_distribution<double> re(box[0], box[1]), im(box[2], box[3]);
    std::vector<Complex> out;
    out.reserve(count);
    std::size_t tries = 0;
    while (out.size() < count) {
        if (++tries > 1000 * count + 1000) throw InvalidArgument("domain rejection sampling did not converge");
        const Complex p(re(rng), im(rng));
        if (d.contains(p)) out.push_back(p);
    }
    return out;
}

/// Deterministic fill: cell centres of an n x n lattice over the bounding box
/// that fall inside the domain.
inline std::vector<Complex> fill_domain(const PlaneDomain& d, std::size_t n) {
    const auto box = d.bounding_box();
    std::vector<Complex> out;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const Complex p(box[0] + (box[1] - box[0]) * (static_cast<double>(i) + 0.5) / static_cast<double>(n),
                            box[2] + (box[3] - box[2]) * (static_cast<double>(j) + 0.5) / static_cast<double>(n));
            if (d.contains(p)) out.push_back(p);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Circle criterion

struct DiskGrid {
    std::size_t radial = 64;
    std::size_t angular = 256;
    double margin = 1e-6; ///< |modulus - 1| below this counts as on the circle
};

struct ImageWitness {
    Complex point;
    Complex value;
};

struct GsFlags {
    bool meets_unit_circle = false;        ///< closure test: some image modulus within the margin of 1, or crosses
    bool crosses_unit_circle = false;      ///< image has moduli below 1 - margin and above 1 + margin
    bool image_inside_open_disk = false;   ///< every sampled modulus < 1
    bool image_avoids_closed_disk = false; ///< every sampled modulus > 1
    std::optional<ImageWitness> on_circle; ///< sample closest to the circle
    std::optional<ImageWitness> inside;    ///< sample of smallest modulus
    std::optional<ImageWitness> outside;   ///< sample of largest modulus
    std::size_t samples = 0;
};

/// Polar grid of the closed disk: the centre, `radial` rings at radii
/// 1 - 10^{-6 i / radial} that crowd toward the boundary, and the unit circle.
inline std::vector<Complex> disk_points(const DiskGrid& g) {
    std::vector<Complex> pts{Complex(0)};
    for (std::size_t i = 1; i <= g.radial + 1; ++i) {
        const double r = i > g.radial ? 1.0 : 1.0 - std::pow(10.0, -6.0 * static_cast<double>(i) / static_cast<double>(g.radial));
        for (std::size_t j = 0; j < g.angular; ++j)
            pts.push_back(std::polar(r, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(g.angular)));
    }
    return pts;
}

/// Flags from the sampled image. Inconclusive when every modulus sits in
/// the margin band, since then no sample separates the cases.
inline GsFlags check_gs_criterion(const Symbol& s, const DiskGrid& grid = {}) {
    if (s.is_constant()) throw InvalidArgument("the criterion needs a non-constant symbol");
    std::vector<std::pair<Complex, Complex>> img;
    if (s.kind() == Symbol::Kind::polynomial) {
        if (grid.radial < 64 || grid.angular < 256) throw InvalidArgument("disk grid must be at least 64 x 256");
        for (const auto& p : disk_points(grid)) img.emplace_back(p, s(p));
    } else {
        img = s.samples();
    }
    GsFlags f;
    f.samples = img.size();
    bool any_below = false, any_above = false, all_in_band = true, all_lt = true, all_gt = true;
    double best_gap = std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity(), hi = -1.0;
    for (const auto& [p, v] : img) {
        const double m = std::abs(v);
        const double gap = std::abs(m - 1.0);
        if (gap < best_gap) {
            best_gap = gap;
            f.on_circle = ImageWitness{p, v};
        }
        if (m < lo) {
            lo = m;
            f.inside = ImageWitness{p, v};
        }
        if (m > hi) {
            hi = m;
            f.outside = ImageWitness{p, v};
        }
        if (gap >= grid.margin) all_in_band = false;
        if (m < 1.0 - grid.margin) any_below = true;
        if (m > 1.0 + grid.margin) any_above = true;
        if (!(m < 1.0)) all_lt = false;
        if (!(m > 1.0)) all_gt = false;
    }
    if (all_in_band) throw Inconclusive("every sampled image modulus lies within the margin band of 1");
    f.crosses_unit_circle = any_below && any_above;
    f.meets_unit_circle = f.crosses_unit_circle || best_gap < grid.margin;
    f.image_inside_open_disk = all_lt;
    f.image_avoids_closed_disk = all_gt;
    if (!f.meets_unit_circle) f.on_circle.reset();
    return f;
}

// ---------------------------------------------------------------------------
// The four domain facts

struct FactReport {
    std::string statement;
    bool at_witness = false;
    bool on_samples = false;
    std::optional<Complex> witness;
    std::size_t samples = 0;
    std::size_t violations = 0;
};

struct DomainFacts {
    FactReport meets_1_plus_U;  ///< (1+U) meets T
    FactReport exp_U_in_disk;   ///< e^U inside D
    FactReport disjoint_1_plus_V; ///< (1+V) misses D
    FactReport exp_V_meets;     ///< e^V meets T
    bool all() const {
        for (const auto* f : {&meets_1_plus_U, &exp_U_in_disk, &disjoint_1_plus_V, &exp_V_meets})
            if (!f->at_witness || !f->on_samples) return false;
        return true;
    }
};

struct DomainFactsOptions {
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    Complex u_shift{0.0}; ///< translate U, e.g. by 2 to break the second fact
};

/// Existence facts are checked exactly at their constructed witness and, on
/// samples, by finding image points strictly on both sides of the circle
/// (U and V are connected, so the image then crosses it). Containment facts
/// are checked on every sample through their exact reductions (a < 0, and
/// 1 + a > sqrt(1 - b^2)) as well as numerically.
inline DomainFacts verify_domain_facts(const DomainFactsOptions& opt = {}) {
    std::mt19937_64 rng(opt.seed);
    const auto U = PlaneDomain::triangle_U().shifted(opt.u_shift);
    const auto V = PlaneDomain::lens_V();
    const auto us = sample_domain(U, opt.samples, rng);
    const auto vs = sample_domain(V, opt.samples, rng);
    DomainFacts out;

    {
        auto& f = out.meets_1_plus_U;
        f.statement = "(1+U) meets the unit circle";
        const Complex w = std::polar(1.0, -std::numbers::pi / 6) - 1.0 + opt.u_shift;
        f.witness = w;
        f.at_witness = U.contains(w) && std::abs(std::abs(1.0 + w) - 1.0) <= 1e-15;
        bool below = false, above = false;
        for (const auto& z : us) {
            const double m = std::abs(1.0 + z);
            below = below || m < 1.0;
            above = above || m > 1.0;
        }
        f.samples = us.size();
        f.on_samples = below && above;
        f.violations = f.on_samples ? 0 : 1;
    }
    {
        auto& f = out.exp_U_in_disk;
        f.statement = "e^U lies in the open unit disk";
        const Complex w = Complex(-0.9, 0.0) + opt.u_shift;
        f.witness = w;
        f.at_witness = U.contains(w) && std::abs(std::exp(w)) < 1.0;
        for (const auto& z : us) {
            const bool exact = z.real() < 0.0; // |e^z| = e^a < 1 iff a < 0
            const double m = std::abs(std::exp(z));
            if (!exact || !(m <= 1.0)) ++f.violations;
        }
        f.samples = us.size();
        f.on_samples = f.violations == 0;
    }
    {
        auto& f = out.disjoint_1_plus_V;
        f.statement = "(1+V) misses the open unit disk";
        const Complex w(-0.1, 0.6);
        f.witness = w;
        auto check = [](Complex z) {
            const double a = z.real(), b = z.imag();
            const bool exact = a - (std::sqrt(1.0 - b * b) - 1.0) > 0.0;
            return exact && (1.0 + a) * (1.0 + a) + b * b > 1.0;
        };
        f.at_witness = V.contains(w) && check(w);
        for (const auto& z : vs)
            if (!check(z)) ++f.violations;
        f.samples = vs.size();
        f.on_samples = f.violations == 0;
    }
    {
        auto& f = out.exp_V_meets;
        f.statement = "e^V meets the unit circle";
        const Complex w(0.0, 0.5);
        f.witness = w;
        f.at_witness = V.contains(w) && std::abs(std::abs(std::exp(w)) - 1.0) <= 1e-15;
        bool below = false, above = false;
        for (const auto& z : vs) {
            const double m = std::abs(std::exp(z));
            below = below || m < 1.0;
            above = above || m > 1.0;
        }
        f.samples = vs.size();
        f.on_samples = below && above;
        f.violations = f.on_samples ? 0 : 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Truncated adjoint multipliers

/// N x N truncation of M_alpha^* in the monomial basis: the conjugate
/// transpose of the lower-triangular Toeplitz matrix of Taylor coefficients,
/// so entry (i, j) is conj(a_{j-i}).
inline Matrix<Complex> build_adjoint_multiplier(const Symbol& s, std::size_t N) {
    if (s.kind() != Symbol::Kind::polynomial) throw InvalidArgument("adjoint multiplier needs a polynomial symbol");
    if (s.degree() >= N) throw DegreeTooHigh("degree " + std::to_string(s.degree()) + " needs N > degree");
    Matrix<Complex> m(N, N);
    const auto& a = s.coeffs();
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t d = 0; d < a.size() && i + d < N; ++d) m(i, i + d) = std::conj(a[d]);
    return m;
}

/// Taylor coefficients of e^{f} up to z^{N-1}, from g' = f' g.
inline std::vector<Complex> exp_taylor(const std::vector<Complex>& f, std::size_t N) {
    std::vector<Complex> g(N, Complex(0));
    if (N == 0) return g;
    g[0] = std::exp(f.empty() ? Complex(0) : f[0]);
    for (std::size_t n = 1; n < N; ++n) {
        Complex s(0);
        for (std::size_t k = 1; k <= n && k < f.size(); ++k) s += static_cast<double>(k) * f[k] * g[n - k];
        g[n] = s / static_cast<double>(n);
    }
    return g;
}

/// ||M^(N) k_w - conj(alpha(w)) k_w|| / ||k_w|| with k_w = (1, w̄, w̄^2, ...).
inline double kernel_eigencheck(const Symbol& s, Complex w, std::size_t N) {
    if (!(std::abs(w) < 1.0)) throw InvalidArgument("kernel point must lie in the open disk");
    const auto m = build_adjoint_multiplier(s, N);
    Vector<Complex> k(N);
    Complex p(1.0);
    for (std::size_t i = 0; i < N; ++i, p *= std::conj(w)) k[i] = p;
    auto mk = m * k;
    const Complex lam = std::conj(s(w));
    for (std::size_t i = 0; i < N; ++i) mk[i] -= lam * k[i];
    return l2_norm(std::span<const Complex>(mk)) / l2_norm(std::span<const Complex>(k));
}

// ---------------------------------------------------------------------------
// The four-operator scenario

struct ScenarioCell {
    std::string op;       ///< "I+A", "e^A", "I+B", "e^B"
    std::string test;     ///< which flag decides it
    bool flag = false;
    std::string decision; ///< "hypercyclic-type" or "non-hypercyclic"
};

struct ScenarioReport {
    DomainFacts facts;
    std::vector<ScenarioCell> cells;
    std::size_t alpha_samples = 0, beta_samples = 0;
    bool pattern_ok() const {
        static const char* expect[] = {"hypercyclic-type", "non-hypercyclic", "non-hypercyclic", "hypercyclic-type"};
        if (cells.size() != 4) return false;
        for (std::size_t i = 0; i < 4; ++i)
            if (!cells[i].flag || cells[i].decision != expect[i]) return false;
        return true;
    }
};

/// Scenario from proxy symbols whose sampled images are alpha(D) and beta(D).
inline ScenarioReport b2cp_scenario_from(const Symbol& alpha, const Symbol& beta, const DomainFactsOptions& opt = {},
                                         const DiskGrid& grid = {}) {
    if (alpha.kind() != Symbol::Kind::sampled || beta.kind() != Symbol::Kind::sampled)
        throw InvalidArgument("proxy symbols must be sampled");
    if (alpha.is_constant() || beta.is_constant()) throw InvalidArgument("proxy symbols must be non-constant");
    ScenarioReport rep;
    rep.facts = verify_domain_facts(opt);
    rep.alpha_samples = alpha.samples().size();
    rep.beta_samples = beta.samples().size();

    const auto one_plus = [](Complex v) { return 1.0 + v; };
    const auto expo = [](Complex v) { return std::exp(v); };
    const auto f1 = check_gs_criterion(alpha.map_values(one_plus), grid);
    const auto f2 = check_gs_criterion(alpha.map_values(expo), grid);
    const auto f3 = check_gs_criterion(beta.map_values(one_plus), grid);
    const auto f4 = check_gs_criterion(beta.map_values(expo), grid);

    const char* hc = "hypercyclic-type";
    const char* nh = "non-hypercyclic";
    rep.cells.push_back({"I+A", "(1+alpha)(D) crosses T", f1.crosses_unit_circle, f1.crosses_unit_circle ? hc : nh});
    rep.cells.push_back({"e^A", "e^alpha(D) inside D", f2.image_inside_open_disk,
                         f2.image_inside_open_disk ? nh : (f2.crosses_unit_circle ? hc : "undecided")});
    rep.cells.push_back({"I+B", "(1+beta)(D) avoids closed D", f3.image_avoids_closed_disk,
                         f3.image_avoids_closed_disk ? nh : (f3.crosses_unit_circle ? hc : "undecided")});
    rep.cells.push_back({"e^B", "e^beta(D) crosses T", f4.crosses_unit_circle, f4.crosses_unit_circle ? hc : nh});
    return rep;
}

/// Proxies: alpha(D) = U and beta(D) = V, filled on a `fill` x `fill` lattice.
inline ScenarioReport b2cp_scenario(const DomainFactsOptions& opt = {}, std::size_t fill = 200) {
    const auto U = PlaneDomain::triangle_U().shifted(opt.u_shift);
    const auto V = PlaneDomain::lens_V();
    std::vector<std::pair<Complex, Complex>> a, b;
    for (const auto& p : fill_domain(U, fill)) a.emplace_back(Complex(0), p);
    for (const auto& p : fill_domain(V, fill)) b.emplace_back(Complex(0), p);
    return b2cp_scenario_from(Symbol::sampled(std::move(a)), Symbol::sampled(std::move(b)), opt);
}

} // namespace hypermix::gallery
