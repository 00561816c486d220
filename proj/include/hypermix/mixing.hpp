#pragma once

// Empirical mixing certificates. An open set is a norm ball, and a
// certificate for (U, V) lists, for each sampled parameter t, a point x in U
// with T_t x in V. Witnesses come from steering the projections of the two
// centres onto the kernel span KER(A), with the two centres themselves as
// fallbacks. Every witness is re-checked against the group applier before it
// is stored. This is sampled evidence, not a proof.
//
// The second half is the finite-dimensional orbit-coverage experiment: the
// projective orbit of e^{tA}x hit-counted on an equal-area sphere mesh.

#include "hypermix/dense.hpp"
#include "hypermix/errors.hpp"
#include "hypermix/parallel.hpp"
#include "hypermix/scalar.hpp"
#include "hypermix/tensor.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hypermix::mixing {

using MultiIndex = std::vector<std::size_t>;

enum class NormTag { q, p }; ///< q: l1 norm, p: sup norm

inline const char* to_string(NormTag n) { return n == NormTag::q ? "q" : "p"; }

template <Field T>
double ball_norm(NormTag tag, std::span<const T> v) {
    return tag == NormTag::q ? l1_norm(v) : max_abs(v);
}

template <Field T>
struct OpenBall {
    Vector<T> center;
    double radius = 1.0;
    NormTag norm = NormTag::q;

    OpenBall() = default;
    OpenBall(Vector<T> c, double r, NormTag n = NormTag::q) : center(std::move(c)), radius(r), norm(n) {
        if (!(r > 0.0)) throw InvalidArgument("ball radius must be positive");
    }

    double distance(std::span<const T> x) const {
        if (x.size() != center.size()) throw InvalidArgument("ball and point dimensions differ");
        Vector<T> d(x.begin(), x.end());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] -= center[i];
        return ball_norm<T>(norm, d);
    }
    bool contains(std::span<const T> x) const { return distance(x) < radius; }
};

/// t -> (x -> T_t x). Must be safe to call from several threads.
template <Field T>
using GroupApplier = std::function<Vector<T>(std::span<const T> t, std::span<const T> x)>;

/// (t, u, v) -> x with x near u and T_t x near v, or nullopt when the
/// construction does not apply at this t.
template <Field T>
using WitnessSteerer = std::function<std::optional<Vector<T>>(std::span<const T> t, const Vector<T>& u,
                                                              const Vector<T>& v)>;

enum class WitnessKind { steered, center, pullback };

inline const char* to_string(WitnessKind w) {
    switch (w) {
    case WitnessKind::steered: return "steered";
    case WitnessKind::center: return "center";
    case WitnessKind::pullback: return "pullback";
    }
    return "?";
}

template <Field T>
struct Witness {
    Vector<T> t;
    Vector<T> x;
    Vector<T> image;
    double dist_u = 0.0; ///< ||x - center(U)||
    double dist_v = 0.0; ///< ||T_t x - center(V)||
    WitnessKind kind = WitnessKind::steered;
};

struct SampleResult {
    double magnitude = 0.0; ///< |t|, Euclidean
    bool success = false;
    double steered_dist_v = std::numeric_limits<double>::quiet_NaN(); ///< NaN when steering did not apply
};

template <Field T>
struct MixingCertificate {
    OpenBall<T> U, V;
    std::vector<Vector<T>> t_grid;
    std::vector<SampleResult> samples; ///< parallel to t_grid
    std::vector<Witness<T>> witnesses;
    std::vector<Vector<T>> failures;
    std::optional<double> r; ///< smallest grid |t| beyond which every sample succeeded
    double projection_gap_u = 0.0, projection_gap_v = 0.0;

    bool empty() const { return witnesses.empty(); }
};

template <Field T>
double parameter_magnitude(std::span<const T> t) {
    return l2_norm(t);
}

/// Smallest grid magnitude m* with every sample of magnitude >= m* a success.
inline std::optional<double> threshold_from(const std::vector<SampleResult>& s) {
    std::optional<double> r;
    double worst_failure = -1.0;
    for (const auto& x : s)
        if (!x.success) worst_failure = std::max(worst_failure, x.magnitude);
    for (const auto& x : s)
        if (x.success && x.magnitude > worst_failure && (!r || x.magnitude < *r)) r = x.magnitude;
    return r;
}

/// Orthogonal (l2) projection onto span(basis). Empty basis projects to 0.
template <Field T>
Vector<T> project_onto_span(const std::vector<Vector<T>>& basis, std::span<const T> c) {
    Vector<T> out(c.size(), T(0));
    if (basis.empty()) return out;
    const std::size_t m = basis.size();
    Matrix<T> gram(m, m);
    Vector<T> rhs(m, T(0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            T s = T(0);
            for (std::size_t r = 0; r < c.size(); ++r) s += conjugate(basis[i][r]) * basis[j][r];
            gram(i, j) = s;
        }
        for (std::size_t r = 0; r < c.size(); ++r) rhs[i] += conjugate(basis[i][r]) * c[r];
    }
    const auto coef = solve(gram, std::span<const T>(rhs));
    for (std::size_t i = 0; i < m; ++i) out = axpy(coef[i], basis[i], std::move(out));
    return out;
}

/// Scans t_grid. At each t the candidates are, in order: the steered vector
/// for (proj U-centre, proj V-centre), the U-centre itself, and the pullback
/// T_{-t} V-centre. The first that passes both ball checks is the witness.
/// NotReachable when the kernel span misses a ball entirely.
template <Field T>
MixingCertificate<T> certify_mixing(const GroupApplier<T>& group, const std::vector<Vector<T>>& kernel_basis,
                                    const OpenBall<T>& U, const OpenBall<T>& V, const std::vector<Vector<T>>& t_grid,
                                    const WitnessSteerer<T>& steer = {}) {
    if (U.center.size() != V.center.size()) throw InvalidArgument("balls live in different spaces");
    MixingCertificate<T> cert;
    cert.U = U;
    cert.V = V;
    cert.t_grid = t_grid;

    const auto pu = project_onto_span<T>(kernel_basis, U.center);
    const auto pv = project_onto_span<T>(kernel_basis, V.center);
    cert.projection_gap_u = U.distance(pu);
    cert.projection_gap_v = V.distance(pv);
    if (!kernel_basis.empty() && (cert.projection_gap_u >= U.radius || cert.projection_gap_v >= V.radius))
        throw NotReachable("kernel span misses a ball: gaps " + std::to_string(cert.projection_gap_u) + ", " +
                           std::to_string(cert.projection_gap_v));
    const bool can_steer = steer && !kernel_basis.empty();

    std::vector<std::optional<Witness<T>>> found(t_grid.size());
    cert.samples.resize(t_grid.size());
    parallel_for(t_grid.size(), [&](std::size_t i) {
        const auto& t = t_grid[i];
        auto& sample = cert.samples[i];
        sample.magnitude = parameter_magnitude<T>(t);
        auto check = [&](Vector<T> x, WitnessKind kind) -> bool {
            auto img = group(t, x);
            Witness<T> w{t, std::move(x), std::move(img), 0.0, 0.0, kind};
            w.dist_u = U.distance(w.x);
            w.dist_v = V.distance(w.image);
            if (kind == WitnessKind::steered) sample.steered_dist_v = w.dist_v;
            if (w.dist_u < U.radius && w.dist_v < V.radius) {
                found[i] = std::move(w);
                return true;
            }
            return false;
        };
        if (can_steer)
            if (auto x = steer(t, pu, pv); x && check(std::move(*x), WitnessKind::steered)) {
                sample.success = true;
                return;
            }
        if (check(U.center, WitnessKind::center)) {
            sample.success = true;
            return;
        }
        Vector<T> back(t.begin(), t.end());
        for (auto& v : back) v = -v;
        if (check(group(back, V.center), WitnessKind::pullback)) sample.success = true;
    });

    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (found[i]) cert.witnesses.push_back(std::move(*found[i]));
        else cert.failures.push_back(t_grid[i]);
    }
    cert.r = threshold_from(cert.samples);
    return cert;
}

/// Recomputes both membership inequalities for every stored witness.
template <Field T>
bool recheck_witnesses(const MixingCertificate<T>& cert, const GroupApplier<T>& group) {
    for (const auto& w : cert.witnesses) {
        if (!cert.U.contains(w.x)) return false;
        if (!cert.V.contains(group(w.t, w.x))) return false;
    }
    return true;
}

/// Threshold restricted to the sub-progression start, start+step, ... of the grid.
template <Field T>
std::optional<double> restrict_to_progression(const MixingCertificate<T>& cert, std::size_t start, std::size_t step) {
    if (step == 0) throw InvalidArgument("step must be positive");
    std::vector<SampleResult> sub;
    for (std::size_t i = start; i < cert.samples.size(); i += step) sub.push_back(cert.samples[i]);
    return threshold_from(sub);
}

/// Counts places where the steered distance to centre(V) grows between
/// consecutive samples of increasing |t| past `from_magnitude`, beyond a
/// relative slack.
template <Field T>
std::size_t monotonicity_violations(const MixingCertificate<T>& cert, double from_magnitude, double rel_slack = 1e-9) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& s : cert.samples)
        if (s.magnitude >= from_magnitude && std::isfinite(s.steered_dist_v)) pts.emplace_back(s.magnitude, s.steered_dist_v);
    std::sort(pts.begin(), pts.end());
    std::size_t bad = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].second > pts[i - 1].second * (1.0 + rel_slack) + 1e-15) ++bad;
    return bad;
}

// ---------------------------------------------------------------------------
// Hereditary check

struct HereditaryPair {
    std::optional<std::size_t> tail_index; ///< first m with success for every later index
    std::size_t successes = 0;
};

struct HereditaryReport {
    std::vector<HereditaryPair> pairs;
    bool all_tails = false;
};

/// Certifies each (U, V) along a sequence with increasing |t_m| and reports
/// the tail index from which every t_m has a witness.
template <Field T>
HereditaryReport hereditary_check(const GroupApplier<T>& group, const std::vector<Vector<T>>& kernel_basis,
                                  const std::vector<Vector<T>>& t_seq,
                                  const std::vector<std::pair<OpenBall<T>, OpenBall<T>>>& pair_samples,
                                  const WitnessSteerer<T>& steer = {}) {
    for (std::size_t m = 1; m < t_seq.size(); ++m)
        if (!(parameter_magnitude<T>(t_seq[m]) > parameter_magnitude<T>(t_seq[m - 1])))
            throw InvalidArgument("t_seq magnitudes must increase strictly");
    HereditaryReport rep;
    rep.all_tails = true;
    for (const auto& [U, V] : pair_samples) {
        const auto cert = certify_mixing<T>(group, kernel_basis, U, V, t_seq, steer);
        HereditaryPair p;
        std::size_t m = t_seq.size();
        while (m > 0 && cert.samples[m - 1].success) --m;
        if (m < t_seq.size()) p.tail_index = m;
        for (const auto& s : cert.samples) p.successes += s.success ? 1 : 0;
        rep.all_tails = rep.all_tails && p.tail_index.has_value();
        rep.pairs.push_back(p);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Ready-made groups and steerers

/// e^{<z,T>} for a tensor tuple.
template <Field T>
GroupApplier<T> tensor_group(const tensor::TensorTuple& t) {
    return [t](std::span<const T> z, std::span<const T> x) { return tensor::apply_exp<T>(t, z, x); };
}

/// Unit vectors of the M_0 block, the kernel span of a tensor tuple.
template <Field T>
std::vector<Vector<T>> tensor_kernel_basis(const tensor::TensorTuple& t) {
    std::vector<Vector<T>> out;
    for (const auto flat : t.e_block()) {
        Vector<T> e(t.size(), T(0));
        e[flat] = T(1);
        out.push_back(std::move(e));
    }
    return out;
}

/// Steering on a tensor tuple. Targets are the kernel projections and so are
/// supported on M_0.
template <Field T>
WitnessSteerer<T> tensor_steerer(const tensor::TensorTuple& t, double tau = 10.0) {
    return [t, tau](std::span<const T> z, const Vector<T>& u, const Vector<T>& v) -> std::optional<Vector<T>> {
        Vector<T> uu(t.size(), T(0)), vv(t.size(), T(0));
        for (const auto flat : t.e_block()) {
            uu[flat] = u[flat];
            vv[flat] = v[flat];
        }
        const auto res = tensor::steer_tensor<T>(t, uu, vv, {Vector<T>(z.begin(), z.end())}, tau);
        return res.x.front();
    };
}

/// An element of kappa(n, A): x = A_1^{n_1}...A_k^{n_k} y with A_j^{2n_j} y = 0.
template <Field T>
struct KernelElement {
    MultiIndex n;
    Vector<T> y;
};

/// Steering for a general commuting tuple through the finite invariant
/// subspace of each kernel element. With h_l = A^{2n-l} y for l in the box
/// M = prod {1..2n_j}, the map J e_l = h_l intertwines the tensor shift tuple
/// on K^M with A, and x = h_n. Targets are expanded in the elements (least
/// squares), each element is steered in K^M, and the results are pushed
/// through J.
template <Field T>
class KernelSteerer {
public:
    KernelSteerer(std::vector<Matrix<T>> ops, std::vector<KernelElement<T>> elements, double tau = 10.0,
                  double rel_tol = 1e-10)
        : ops_(std::move(ops)), tau_(tau) {
        if (ops_.empty()) throw InvalidArgument("empty operator tuple");
        const std::size_t dim = ops_.front().rows();
        for (auto& el : elements) {
            if (el.n.size() != ops_.size()) throw InvalidArgument("kernel element index has wrong length");
            if (el.y.size() != dim) throw InvalidArgument("kernel element vector has wrong length");
            Piece p{tensor::build_tensor_tuple(el.n), {}, {}};
            p.h.resize(p.tuple.size());
            for (std::size_t flat = 0; flat < p.tuple.size(); ++flat) {
                const auto l = p.tuple.multi_index(flat);
                Vector<T> h = el.y;
                for (std::size_t j = 0; j < ops_.size(); ++j)
                    for (std::size_t s = 0; s < 2 * el.n[j] - l[j]; ++s) h = ops_[j] * h;
                p.h[flat] = std::move(h);
            }
            // A_j^{2n_j} y = 0 for every j
            const double scale = std::max(1.0, max_abs(el.y));
            for (std::size_t j = 0; j < ops_.size(); ++j) {
                Vector<T> w = el.y;
                for (std::size_t s = 0; s < 2 * el.n[j]; ++s) w = ops_[j] * w;
                if constexpr (is_rational_v<T>) {
                    for (const auto& v : w)
                        if (!is_zero(v)) throw InvalidArgument("A_j^{2n_j} y != 0 for a kernel element");
                } else if (max_abs(w) > rel_tol * scale) {
                    throw InvalidArgument("A_j^{2n_j} y != 0 for a kernel element");
                }
            }
            p.x = p.h[p.tuple.flat_index(el.n)];
            pieces_.push_back(std::move(p));
        }
    }

    std::size_t size() const { return pieces_.size(); }
    const Vector<T>& element(std::size_t i) const { return pieces_.at(i).x; }

    std::vector<Vector<T>> basis() const {
        std::vector<Vector<T>> out;
        for (const auto& p : pieces_) out.push_back(p.x);
        return out;
    }

    struct Steered {
        Vector<T> x;
        Vector<T> image; ///< J e^{<z,T>} w, exact relation e^{<z,A>} J = J e^{<z,T>}
    };

    /// x with x ~ sum cu_i x_i and e^{<z,A>}x ~ sum cv_i x_i.
    std::optional<Steered> steer_coefficients(std::span<const T> cu, std::span<const T> cv, std::span<const T> z) const {
        if (cu.size() != size() || cv.size() != size()) throw InvalidArgument("coefficient count differs from elements");
        const std::size_t dim = ops_.front().rows();
        Steered out{Vector<T>(dim, T(0)), Vector<T>(dim, T(0))};
        for (std::size_t i = 0; i < size(); ++i) {
            const auto& p = pieces_[i];
            const auto corner = p.tuple.flat_index(elements_index(i));
            Vector<T> u(p.tuple.size(), T(0)), v(p.tuple.size(), T(0));
            u[corner] = cu[i];
            v[corner] = cv[i];
            const auto res = tensor::steer_tensor<T>(p.tuple, u, v, {Vector<T>(z.begin(), z.end())}, tau_);
            if (!res.x.front()) return std::nullopt;
            const auto& w = *res.x.front();
            const auto& wi = *res.image.front();
            for (std::size_t flat = 0; flat < w.size(); ++flat) {
                if (!is_zero(w[flat])) out.x = axpy(w[flat], p.h[flat], std::move(out.x));
                if (!is_zero(wi[flat])) out.image = axpy(wi[flat], p.h[flat], std::move(out.image));
            }
        }
        return out;
    }

    /// Coefficients of the l2-nearest point of span{x_i}.
    Vector<T> coefficients(std::span<const T> target) const {
        const std::size_t m = size();
        Matrix<T> gram(m, m);
        Vector<T> rhs(m, T(0));
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                T s = T(0);
                for (std::size_t r = 0; r < target.size(); ++r) s += conjugate(pieces_[i].x[r]) * pieces_[j].x[r];
                gram(i, j) = s;
            }
            for (std::size_t r = 0; r < target.size(); ++r) rhs[i] += conjugate(pieces_[i].x[r]) * target[r];
        }
        return solve(gram, std::span<const T>(rhs));
    }

    WitnessSteerer<T> as_witness_steerer() const {
        return [self = *this](std::span<const T> z, const Vector<T>& u, const Vector<T>& v) -> std::optional<Vector<T>> {
            const auto cu = self.coefficients(u), cv = self.coefficients(v);
            auto s = self.steer_coefficients(cu, cv, z);
            if (!s) return std::nullopt;
            return std::move(s->x);
        };
    }

private:
    struct Piece {
        tensor::TensorTuple tuple;
        std::vector<Vector<T>> h;
        Vector<T> x;
    };

    MultiIndex elements_index(std::size_t i) const { return pieces_[i].tuple.dims(); }

    std::vector<Matrix<T>> ops_;
    std::vector<Piece> pieces_;
    double tau_;
};

// ---------------------------------------------------------------------------
// Orbit coverage

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

namespace detail {

inline Mat3 mul(const Mat3& a, const Mat3& b) {
    Mat3 c{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int l = 0; l < 3; ++l) c[i][j] += a[i][l] * b[l][j];
    return c;
}

inline Vec3 mul(const Mat3& a, const Vec3& x) {
    Vec3 y{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) y[i] += a[i][j] * x[j];
    return y;
}

} // namespace detail

/// e^{A} by scaling and squaring with an 18-term Taylor core.
inline Mat3 expm3(const Mat3& a) {
    double norm = 0.0;
    for (const auto& row : a) {
        double s = 0.0;
        for (const double v : row) s += std::abs(v);
        norm = std::max(norm, s);
    }
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const double scale = std::ldexp(1.0, -squarings);
    Mat3 b{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) b[i][j] = a[i][j] * scale;
    Mat3 result{}, term{};
    for (int i = 0; i < 3; ++i) result[i][i] = term[i][i] = 1.0;
    for (int m = 1; m <= 18; ++m) {
        term = detail::mul(term, b);
        for (auto& row : term)
            for (auto& v : row) v /= m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) result[i][j] += term[i][j];
    }
    for (int s = 0; s < squarings; ++s) result = detail::mul(result, result);
    return result;
}

/// Equal-area cells: `bands` slabs uniform in the z coordinate (Archimedes)
/// times `longitudes` sectors.
struct SphereMesh {
    std::size_t bands = 64;
    std::size_t longitudes = 128;

    std::size_t cells() const { return bands * longitudes; }

    std::size_t cell_of(const Vec3& u) const {
        const double zc = std::clamp(u[2], -1.0, 1.0);
        auto b = static_cast<std::size_t>(std::floor((zc + 1.0) / 2.0 * static_cast<double>(bands)));
        b = std::min(b, bands - 1);
        const double phi = std::atan2(u[1], u[0]) + std::numbers::pi;
        auto l = static_cast<std::size_t>(std::floor(phi / (2.0 * std::numbers::pi) * static_cast<double>(longitudes)));
        l = std::min(l, longitudes - 1);
        return b * longitudes + l;
    }
};

struct CoverageReport {
    std::size_t cells = 0;
    std::size_t hit = 0;
    double fraction = 0.0;
    std::size_t samples = 0;
};

/// Fraction of mesh cells met by {+-e^{tA}x / |e^{tA}x| : 0 <= t <= t_max}
/// sampled at `samples` evenly spaced t. Successive points use one step
/// matrix e^{dt A} and are renormalized, so growth never overflows.
inline CoverageReport orbit_coverage_3d(const Mat3& a, Vec3 x, double t_max, std::size_t samples,
                                        SphereMesh mesh = {}) {
    const double nx = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    if (!(nx > 0.0)) throw InvalidArgument("x must be nonzero");
    if (!(t_max > 0.0)) throw InvalidArgument("t_max must be positive");
    if (samples < 2) throw InvalidArgument("need at least two samples");
    if (mesh.cells() < 1000) throw InvalidArgument("mesh must have at least 1000 cells");

    const double dt = t_max / static_cast<double>(samples - 1);
    Mat3 step{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) step[i][j] = a[i][j] * dt;
    step = expm3(step);

    std::vector<bool> hit(mesh.cells(), false);
    for (auto& v : x) v /= nx;
    for (std::size_t s = 0; s < samples; ++s) {
        if (s > 0) {
            x = detail::mul(step, x);
            const double n = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
            if (!(n > 0.0) || !std::isfinite(n)) throw IllConditioned("orbit direction lost");
            for (auto& v : x) v /= n;
        }
        hit[mesh.cell_of(x)] = true;
        hit[mesh.cell_of({-x[0], -x[1], -x[2]})] = true;
    }
    CoverageReport rep;
    rep.cells = mesh.cells();
    rep.samples = samples;
    for (const bool h : hit) rep.hit += h ? 1 : 0;
    rep.fraction = static_cast<double>(rep.hit) / static_cast<double>(rep.cells);
    return rep;
}

} // namespace hypermix::mixing
