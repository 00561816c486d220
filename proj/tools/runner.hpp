#pragma once

// Experiment runner behind the hypermix executable. Each subcommand reads a
// validated parameter block, runs one module and returns a JSON report plus
// CSV tables. Reports hold no wall-clock data; run_meta.json carries that.

#include "hypermix/gallery.hpp"
#include "hypermix/jordan.hpp"
#include "hypermix/lp_grid.hpp"
#include "hypermix/mixing.hpp"
#include "hypermix/seqspace.hpp"
#include "hypermix/tensor.hpp"

#include "json.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace hypermix::cli {

using nlohmann::json;

enum class Arith { float_, rational };

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> s{"steer",          "tensor-steer", "group-build", "mix-cert",
                                            "orbit-coverage", "gallery",      "lp-demo"};
    return s;
}

struct Overrides {
    std::optional<std::string> subcommand;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> arith;
};

struct ExperimentConfig {
    std::string subcommand;
    std::uint64_t seed = 0;
    Arith arith = Arith::float_;
    json params = json::object();
};

struct RunResult {
    int exit_code = 0;
    json report;
    std::map<std::string, std::string> tables; ///< file stem -> CSV text
};

// ---------------------------------------------------------------------------
// Validation

/// Typed access to one parameter object; every error names its JSON pointer.
class Params {
public:
    Params(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(path_, "must be an object");
    }

    std::string at(const std::string& key) const { return path_ + "/" + key; }

    long long integer(const std::string& key, long long def, long long lo, long long hi) {
        seen_.insert(key);
        if (!j_.contains(key)) return def;
        const auto& v = j_[key];
        if (!v.is_number_integer()) throw ValidationError(at(key), "must be an integer");
        const auto x = v.get<long long>();
        if (x < lo || x > hi)
            throw ValidationError(at(key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return x;
    }

    double number(const std::string& key, double def, double lo, double hi, bool open_lo = false) {
        seen_.insert(key);
        if (!j_.contains(key)) return def;
        const auto& v = j_[key];
        if (!v.is_number()) throw ValidationError(at(key), "must be a number");
        const auto x = v.get<double>();
        if (!(open_lo ? x > lo : x >= lo) || !(x <= hi)) throw ValidationError(at(key), "out of range");
        return x;
    }

    std::vector<long long> integers(const std::string& key, std::vector<long long> def, long long lo, long long hi,
                                    std::size_t min_len, std::size_t max_len) {
        seen_.insert(key);
        if (!j_.contains(key)) return def;
        const auto& v = j_[key];
        if (!v.is_array() || v.size() < min_len || v.size() > max_len)
            throw ValidationError(at(key), "must be an array of " + std::to_string(min_len) + ".." +
                                               std::to_string(max_len) + " integers");
        std::vector<long long> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number_integer()) throw ValidationError(at(key) + "/" + std::to_string(i), "must be an integer");
            const auto x = v[i].get<long long>();
            if (x < lo || x > hi) throw ValidationError(at(key) + "/" + std::to_string(i), "out of range");
            out.push_back(x);
        }
        return out;
    }

    const json* raw(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_[key] : nullptr;
    }

    void finish() const {
        for (const auto& [k, _] : j_.items())
            if (!seen_.count(k)) throw ValidationError(at(k), "unknown parameter");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

/// Config document plus command-line overrides -> validated config. The
/// seed is mandatory: it must come from the file or from --seed.
inline ExperimentConfig validate_config(const json& doc, const Overrides& ov = {}) {
    if (!doc.is_object()) throw ValidationError("", "config must be a JSON object");
    for (const auto& [k, _] : doc.items())
        if (k != "subcommand" && k != "seed" && k != "arith" && k != "params" && k != "$schema")
            throw ValidationError("/" + k, "unknown field");
    ExperimentConfig cfg;
    if (ov.subcommand) cfg.subcommand = *ov.subcommand;
    else if (doc.contains("subcommand") && doc["subcommand"].is_string()) cfg.subcommand = doc["subcommand"].get<std::string>();
    else throw ValidationError("/subcommand", "required string");
    if (std::find(subcommands().begin(), subcommands().end(), cfg.subcommand) == subcommands().end())
        throw ValidationError("/subcommand", "unknown subcommand '" + cfg.subcommand + "'");

    if (ov.seed) cfg.seed = *ov.seed;
    else if (!doc.contains("seed")) throw ValidationError("/seed", "required: reruns are only reproducible with a seed");
    else if (!doc["seed"].is_number_integer() || (!doc["seed"].is_number_unsigned() && doc["seed"].get<std::int64_t>() < 0))
        throw ValidationError("/seed", "must be a non-negative integer");
    else cfg.seed = doc["seed"].get<std::uint64_t>();

    std::string arith = "float";
    if (ov.arith) arith = *ov.arith;
    else if (doc.contains("arith")) {
        if (!doc["arith"].is_string()) throw ValidationError("/arith", "must be \"float\" or \"rational\"");
        arith = doc["arith"].get<std::string>();
    }
    if (arith == "float") cfg.arith = Arith::float_;
    else if (arith == "rational") cfg.arith = Arith::rational;
    else throw ValidationError("/arith", "must be \"float\" or \"rational\"");
    static const std::set<std::string> exact_ok{"steer", "tensor-steer", "group-build"};
    if (cfg.arith == Arith::rational && !exact_ok.count(cfg.subcommand))
        throw ValidationError("/arith", "rational arithmetic is not available for " + cfg.subcommand);

    if (doc.contains("params")) cfg.params = doc["params"];
    if (!cfg.params.is_object()) throw ValidationError("/params", "must be an object");
    return cfg;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

class Csv {
public:
    explicit Csv(std::vector<std::string> header) : cols_(header.size()) { row_strings(header); }

    template <typename... Ts>
    void row(const Ts&... xs) {
        std::vector<std::string> cells{cell(xs)...};
        if (cells.size() != cols_) throw InvalidArgument("CSV row width differs from header");
        row_strings(cells);
    }
    std::string str() const { return out_.str(); }

private:
    static std::string cell(double x) { return num(x); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    static std::string cell(bool b) { return b ? "1" : "0"; }
    template <typename I>
        requires std::is_integral_v<I>
    static std::string cell(I i) {
        return std::to_string(i);
    }
    void row_strings(const std::vector<std::string>& c) {
        for (std::size_t i = 0; i < c.size(); ++i) out_ << (i ? "," : "") << c[i];
        out_ << '\n';
    }
    std::size_t cols_;
    std::ostringstream out_;
};

// ---------------------------------------------------------------------------
// Helpers

template <Field T>
T random_unit(std::mt19937_64& rng) {
    // Both backends draw the same integer, so float and rational runs see the
    // same data up to rounding.
    const auto k = static_cast<long long>(rng() % 2001) - 1000;
    if constexpr (is_rational_v<T>) return Rational(k) / Rational(1000);
    else return T(static_cast<double>(k) / 1000.0);
}

template <Field T>
T pow10(long long d) {
    T r(1);
    const T ten(10);
    for (long long i = 0; i < std::abs(d); ++i) r *= ten;
    return d < 0 ? T(1) / r : r;
}

template <Field T>
double to_double(const T& x) {
    if constexpr (is_rational_v<T>) return x.template convert_to<double>();
    else return static_cast<double>(std::real(x));
}

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---------------------------------------------------------------------------
// Subcommands

template <Field T>
RunResult run_steer(const ExperimentConfig& cfg) {
    Params p(cfg.params, "/params");
    const auto n = static_cast<std::size_t>(p.integer("n", 2, 1, 8));
    const auto dec = p.integers("z_decades", {1, 5}, -3, 12, 2, 2);
    const auto pairs = static_cast<std::size_t>(p.integer("pairs", 4, 1, 1000));
    p.finish();
    if (dec[0] > dec[1]) throw ValidationError("/params/z_decades", "first decade must not exceed the second");

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::pair<Vector<T>, Vector<T>>> data;
    for (std::size_t i = 0; i < pairs; ++i) {
        Vector<T> u(n), v(n);
        for (auto& x : u) x = random_unit<T>(rng);
        for (auto& x : v) x = random_unit<T>(rng);
        data.emplace_back(std::move(u), std::move(v));
    }
    Csv csv({"decade", "z", "pair", "residual_u", "residual_v", "scaled_residual", "max_tail_x", "max_tail_image"});
    json rows = json::array();
    std::vector<T> zs;
    for (long long d = dec[0]; d <= dec[1]; ++d) {
        const T z = pow10<T>(d);
        zs.push_back(z);
        double worst_u = 0.0, worst_v = 0.0;
        for (std::size_t i = 0; i < pairs; ++i) {
            const auto sol = jordan::steer<T>(n, z, data[i].first, data[i].second);
            double ru = 0.0;
            for (std::size_t j = 0; j < n; ++j) ru = std::max(ru, magnitude(T(sol.x[j] - data[i].first[j])));
            const double tx = *std::max_element(sol.tail_u.begin(), sol.tail_u.end());
            const double ti = *std::max_element(sol.tail_v.begin(), sol.tail_v.end());
            csv.row(static_cast<long long>(d), to_double(z), i, ru, sol.head_residual, sol.scaled_residual, tx, ti);
            worst_u = std::max(worst_u, ru);
            worst_v = std::max(worst_v, sol.head_residual);
        }
        rows.push_back({{"decade", d}, {"max_residual_u", worst_u}, {"max_residual_v", worst_v}});
    }
    json slopes = json::array();
    if (zs.size() >= 2) {
        const auto rep = jordan::verify_decay<T>(jordan::ShiftBlock(n),
                                                 std::span<const std::pair<Vector<T>, Vector<T>>>(data), 0.0,
                                                 std::span<const T>(zs));
        for (std::size_t j = 0; j < n; ++j)
            slopes.push_back({{"j", j + 1}, {"slope_x", opt_json(rep.slope_x[j])}, {"slope_image", opt_json(rep.slope_image[j])}});
    }
    RunResult r;
    r.report = {{"n", n}, {"pairs", pairs}, {"decades", rows}, {"tail_slopes", slopes}};
    r.tables["steer_residuals"] = csv.str();
    return r;
}

template <Field T>
RunResult run_tensor_steer(const ExperimentConfig& cfg) {
    Params p(cfg.params, "/params");
    const auto dims_i = p.integers("dims", {2, 2}, 1, 6, 1, 4);
    const auto m_max = p.integer("m_max", 5, 1, 8);
    const auto pairs = static_cast<std::size_t>(p.integer("pairs", 20, 1, 1000));
    const double tau = p.number("tau", 10.0, 0.0, 1e12, true);
    p.finish();
    std::vector<std::size_t> dims(dims_i.begin(), dims_i.end());
    const auto t = tensor::build_tensor_tuple(dims);

    std::vector<Vector<T>> zseq;
    for (long long m = 1; m <= m_max; ++m) zseq.emplace_back(t.k(), pow10<T>(m));
    std::mt19937_64 rng(cfg.seed);
    Csv csv({"pair", "m", "residual_x", "residual_image"});
    std::vector<double> final_x(pairs), final_img(pairs);
    std::vector<std::pair<Vector<T>, Vector<T>>> data(pairs);
    for (auto& [u, v] : data) {
        u.assign(t.size(), T(0));
        v.assign(t.size(), T(0));
        for (const auto flat : t.e_block()) {
            u[flat] = random_unit<T>(rng);
            v[flat] = random_unit<T>(rng);
        }
    }
    std::vector<tensor::TensorSteering<T>> res(pairs);
    parallel_for(pairs, [&](std::size_t i) {
        res[i] = tensor::steer_tensor<T>(t, data[i].first, data[i].second, zseq, tau);
    });
    std::size_t decreasing = 0;
    for (std::size_t i = 0; i < pairs; ++i) {
        for (std::size_t m = 0; m < zseq.size(); ++m) csv.row(i, m + 1, res[i].residual_x[m], res[i].residual_image[m]);
        final_x[i] = res[i].residual_x.back();
        final_img[i] = res[i].residual_image.back();
        decreasing += res[i].decreasing_tail ? 1 : 0;
    }
    RunResult r;
    r.report = {{"dims", dims},
                {"pairs", pairs},
                {"m_max", m_max},
                {"max_residual_x_at_m_max", *std::max_element(final_x.begin(), final_x.end())},
                {"max_residual_image_at_m_max", *std::max_element(final_img.begin(), final_img.end())},
                {"pairs_with_decreasing_tail", decreasing}};
    r.tables["tensor_residuals"] = csv.str();
    return r;
}

template <Field T>
std::vector<T> parse_cycle(const json* j, const std::string& path) {
    if (!j) return {T(1)};
    if (!j->is_array() || j->empty()) throw ValidationError(path, "must be a non-empty array");
    std::vector<T> out;
    for (std::size_t i = 0; i < j->size(); ++i) {
        const auto& e = (*j)[i];
        const auto ep = path + "/" + std::to_string(i);
        Rational r;
        if (e.is_number()) r = Rational(e.get<double>());
        else if (e.is_string()) {
            try {
                r = Rational(e.get<std::string>());
            } catch (const std::exception&) {
                throw ValidationError(ep, "not a rational literal");
            }
        } else throw ValidationError(ep, "must be a number or a \"p/q\" string");
        if (!(r != 0 && abs(r) <= 1)) throw ValidationError(ep, "diagonal values need 0 < |d| <= 1");
        out.push_back(from_rational<T>(r));
    }
    return out;
}

template <Field T>
RunResult run_group_build(const ExperimentConfig& cfg) {
    Params p(cfg.params, "/params");
    const auto k = static_cast<std::size_t>(p.integer("k", 2, 1, 4));
    const auto G = static_cast<std::size_t>(p.integer("max_grade", 4, 1, 12));
    const auto cycle = parse_cycle<T>(p.raw("diagonal_cycle"), p.at("diagonal_cycle"));
    const double slack = p.number("slack", 1.0, 1.0, 1e6);
    const double tol = p.number("tol", 1e-10, 0.0, 1.0, true);
    const auto samples = static_cast<std::size_t>(p.integer("samples", 50, 1, 10000));
    const double zscale = p.number("z_scale", 1.0, 0.0, 1e3, true);
    p.finish();

    const seqspace::GradedIndex gamma(k);
    const std::size_t N = gamma.count_up_to(G);
    if (N > 20000) throw ValidationError("/params/max_grade", "truncation too large (N > 20000)");
    const auto model = seqspace::build_model<T>(k, N, cycle, from_rational<T>(Rational(slack)));

    // commutation on basis vectors
    double comm = 0.0;
    bool comm_exact = true;
    for (std::size_t i = 0; i < N; ++i) {
        Vector<T> e(N, T(0));
        e[i] = T(1);
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = a + 1; b < k; ++b) {
                const auto x = model.A[a].apply(model.A[b].apply(e));
                const auto y = model.A[b].apply(model.A[a].apply(e));
                for (std::size_t r = 0; r < N; ++r) {
                    comm = std::max(comm, magnitude(T(x[r] - y[r])));
                    if (!is_zero(T(x[r] - y[r]))) comm_exact = false;
                }
            }
    }

    std::mt19937_64 rng(cfg.seed);
    auto rand_vec = [&](std::size_t len, double scale) {
        Vector<T> v(len);
        for (auto& x : v) x = random_unit<T>(rng) * from_rational<T>(Rational(scale));
        return v;
    };
    double law = 0.0, worst_ratio = 0.0;
    std::size_t violations = 0;
    Csv gcsv({"sample", "group_law_residual", "continuity_lhs", "continuity_rhs"});
    for (std::size_t s = 0; s < samples; ++s) {
        const auto x = rand_vec(N, 1.0), z = rand_vec(k, zscale), w = rand_vec(k, zscale);
        Vector<T> zw(k);
        for (std::size_t j = 0; j < k; ++j) zw[j] = z[j] + w[j];
        const auto lhs = seqspace::exp_group_apply(model, z, seqspace::exp_group_apply(model, w, x, tol).value, tol);
        const auto rhs = seqspace::exp_group_apply(model, zw, x, tol);
        const double d = model.q(subtract(lhs.value, rhs.value));
        law = std::max(law, d);
        const auto ez = seqspace::exp_group_apply(model, z, x, tol);
        const double cl = model.q(subtract(ez.value, x));
        const double cr = seqspace::continuity_bound(model, std::span<const T>(z), std::span<const T>(x));
        if (cl > cr + ez.tail_bound) ++violations;
        if (cr > 0.0) worst_ratio = std::max(worst_ratio, cl / cr);
        gcsv.row(s, d, cl, cr);
    }

    Csv csv({"grade", "eps", "log_alpha", "alpha_ratio"});
    for (std::size_t m = 0; m < G; ++m)
        csv.row(m, model.eps[m], model.log_alpha[m], to_double(model.alpha_ratio[m]));
    json nnz = json::array();
    for (const auto& a : model.A) nnz.push_back(a.nnz());

    RunResult r;
    r.report = {{"k", k},
                {"max_grade", G},
                {"N", N},
                {"a", model.a()},
                {"c", model.c()},
                {"nnz", nnz},
                {"max_scaled_coefficient", seqspace::max_scaled_coefficient(model)},
                {"commutation_max_residual", comm},
                {"commutation_exact_zero", comm_exact},
                {"group_law_max_residual", law},
                {"group_law_bound", is_rational_v<T> ? 0.0 : 2.0 * tol},
                {"group_law_ok", is_rational_v<T> ? law == 0.0 : law <= 2.0 * tol},
                {"continuity_violations", violations},
                {"continuity_worst_ratio", worst_ratio},
                {"samples", samples}};
    r.tables["group_grades"] = csv.str();
    r.tables["group_samples"] = gcsv.str();
    return r;
}

inline std::vector<Vector<double>> magnitude_grid(long long lo_half_decade, long long hi_half_decade) {
    std::vector<Vector<double>> g;
    const double s = std::sqrt(0.5);
    for (long long h = lo_half_decade; h <= hi_half_decade; ++h) {
        const double mag = std::pow(10.0, static_cast<double>(h) / 2.0);
        g.push_back({mag * s, mag * s});
        g.push_back({-mag * 0.8, mag * 0.6});
        g.push_back({mag * 0.28, -mag * 0.96});
    }
    return g;
}

inline RunResult run_mix_cert(const ExperimentConfig& cfg) {
    Params p(cfg.params, "/params");
    const auto dims_i = p.integers("dims", {2, 2}, 1, 6, 2, 2);
    const auto pairs = static_cast<std::size_t>(p.integer("pairs", 20, 1, 1000));
    const double radius = p.number("radius", 0.5, 0.0, 1e6, true);
    const double off = p.number("off_span", 0.1, 0.0, 1e6);
    const auto hd = p.integers("half_decades", {0, 10}, -4, 12, 2, 2);
    p.finish();
    if (off >= radius) throw ValidationError("/params/off_span", "must be below the radius");

    const auto t = tensor::build_tensor_tuple({static_cast<std::size_t>(dims_i[0]), static_cast<std::size_t>(dims_i[1])});
    const auto group = mixing::tensor_group<double>(t);
    const auto basis = mixing::tensor_kernel_basis<double>(t);
    const auto steer = mixing::tensor_steerer<double>(t);
    const auto grid = magnitude_grid(hd[0], hd[1]);
    std::mt19937_64 rng(cfg.seed);
    auto ball = [&] {
        Vector<double> c(t.size(), 0.0);
        for (const auto flat : t.e_block()) c[flat] = random_unit<double>(rng);
        const auto flat = rng() % t.size();
        if (!t.in_e_block(flat)) c[flat] += off;
        return mixing::OpenBall<double>(c, radius);
    };
    Csv csv({"pair", "magnitude", "success", "witness", "dist_u", "dist_v"});
    json per = json::array();
    std::optional<double> worst_r;
    bool all = true;
    for (std::size_t i = 0; i < pairs; ++i) {
        const auto U = ball(), V = ball();
        const auto cert = mixing::certify_mixing<double>(group, basis, U, V, grid, steer);
        std::size_t wi = 0;
        for (std::size_t s = 0; s < grid.size(); ++s) {
            const bool ok = cert.samples[s].success;
            if (ok) {
                const auto& w = cert.witnesses[wi++];
                csv.row(i, cert.samples[s].magnitude, true, mixing::to_string(w.kind), w.dist_u, w.dist_v);
            } else {
                csv.row(i, cert.samples[s].magnitude, false, "none", std::nan(""), std::nan(""));
            }
        }
        if (!cert.r) all = false;
        else worst_r = std::max(worst_r.value_or(0.0), *cert.r);
        per.push_back({{"pair", i}, {"r", opt_json(cert.r)}, {"witnesses", cert.witnesses.size()},
                       {"failures", cert.failures.size()}, {"rechecked", mixing::recheck_witnesses(cert, group)}});
    }
    RunResult r;
    r.report = {{"dims", dims_i}, {"pairs", per}, {"all_certified", all}, {"max_r", opt_json(worst_r)},
                {"grid_size", grid.size()}};
    r.tables["mix_samples"] = csv.str();
    return r;
}

inline RunResult run_orbit_coverage(const ExperimentConfig& cfg) {
    Params p(cfg.params, "/params");
    const auto runs = static_cast<std::size_t>(p.integer("runs", 10, 1, 1000));
    const double t_max = p.number("t_max", 100.0, 0.0, 1e6, true);
    const auto samples = static_cast<std::size_t>(p.integer("samples", 100000, 2, 100000000));
    const auto bands = static_cast<std::size_t>(p.integer("bands", 64, 1, 4096));
    const auto lons = static_cast<std::size_t>(p.integer("longitudes", 128, 1, 4096));
    p.finish();
    if (bands * lons < 1000) throw ValidationError("/params/bands", "mesh needs at least 1000 cells");

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> nd;
    std::vector<mixing::Mat3> gens(runs);
    std::vector<mixing::Vec3> xs(runs);
    for (std::size_t i = 0; i < runs; ++i) {
        for (auto& row : gens[i])
            for (auto& v : row) v = nd(rng);
        for (auto& v : xs[i]) v = nd(rng);
    }
    std::vector<mixing::CoverageReport> reps(runs);
    parallel_for(runs, [&](std::size_t i) {
        reps[i] = mixing::orbit_coverage_3d(gens[i], xs[i], t_max, samples, mixing::SphereMesh{bands, lons});
    });
    Csv csv({"run", "cells", "hit", "fraction"});
    double worst = 0.0;
    for (std::size_t i = 0; i < runs; ++i) {
        csv.row(i, reps[i].cells, reps[i].hit, reps[i].fraction);
        worst = std::max(worst, reps[i].fraction);
    }
    RunResult r;
    r.report = {{"runs", runs}, {"t_max", t_max}, {"samples", samples}, {"cells", bands * lons}, {"max_fraction", worst}};
    r.tables["orbit_coverage"] = csv.str();
    return r;
}

inline json witness_json(const std::optional<gallery::ImageWitness>& w) {
    if (!w) return nullptr;
    return {{"point", {w->point.real(), w->point.imag()}}, {"value", {w->value.real(), w->value.imag()}}};
}

inline RunResult run_gallery(const ExperimentConfig& cfg) {
    Params p(cfg.params, "/params");
    gallery::DomainFactsOptions opt;
    opt.samples = static_cast<std::size_t>(p.integer("samples", 100000, 1, 10000000));
    opt.seed = cfg.seed;
    opt.u_shift = p.number("u_shift", 0.0, -10.0, 10.0);
    const auto fill = static_cast<std::size_t>(p.integer("fill", 200, 8, 4000));
    std::vector<gallery::Symbol> symbols;
    if (const auto* s = p.raw("symbols")) {
        if (!s->is_array()) throw ValidationError("/params/symbols", "must be an array of coefficient lists");
        for (std::size_t i = 0; i < s->size(); ++i) {
            const auto& c = (*s)[i];
            const auto path = "/params/symbols/" + std::to_string(i);
            if (!c.is_array() || c.empty()) throw ValidationError(path, "must be a non-empty coefficient list");
            std::vector<Complex> coeffs;
            for (std::size_t j = 0; j < c.size(); ++j) {
                const auto& e = c[j];
                if (e.is_number()) coeffs.emplace_back(e.get<double>(), 0.0);
                else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
                    coeffs.emplace_back(e[0].get<double>(), e[1].get<double>());
                else throw ValidationError(path + "/" + std::to_string(j), "must be a number or [re, im]");
            }
            symbols.push_back(gallery::Symbol::polynomial(std::move(coeffs)));
            if (symbols.back().is_constant()) throw ValidationError(path, "symbol must be non-constant");
        }
    }
    if (const auto* s = p.raw("sampled_symbols")) {
        if (!s->is_array()) throw ValidationError("/params/sampled_symbols", "must be an array of image-point lists");
        for (std::size_t i = 0; i < s->size(); ++i) {
            const auto& c = (*s)[i];
            const auto path = "/params/sampled_symbols/" + std::to_string(i);
            if (!c.is_array() || c.empty()) throw ValidationError(path, "must be a non-empty list of [re, im] values");
            std::vector<std::pair<Complex, Complex>> pts;
            for (std::size_t j = 0; j < c.size(); ++j) {
                const auto& e = c[j];
                if (!(e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()))
                    throw ValidationError(path + "/" + std::to_string(j), "must be [re, im]");
                pts.emplace_back(Complex(0), Complex(e[0].get<double>(), e[1].get<double>()));
            }
            symbols.push_back(gallery::Symbol::sampled(std::move(pts)));
            if (symbols.back().is_constant()) throw ValidationError(path, "symbol must be non-constant");
        }
    }
    p.finish();

    const auto rep = gallery::b2cp_scenario(opt, fill);
    json cells = json::array();
    Csv csv({"operator", "test", "flag", "decision"});
    for (const auto& c : rep.cells) {
        cells.push_back({{"operator", c.op}, {"test", c.test}, {"flag", c.flag}, {"decision", c.decision}});
        csv.row(c.op, "\"" + c.test + "\"", c.flag, c.decision);
    }
    json facts = json::array();
    Csv fcsv({"fact", "at_witness", "on_samples", "samples", "violations"});
    for (const auto* f : {&rep.facts.meets_1_plus_U, &rep.facts.exp_U_in_disk, &rep.facts.disjoint_1_plus_V,
                          &rep.facts.exp_V_meets}) {
        facts.push_back({{"statement", f->statement},
                         {"at_witness", f->at_witness},
                         {"on_samples", f->on_samples},
                         {"witness", f->witness ? json{f->witness->real(), f->witness->imag()} : json(nullptr)},
                         {"samples", f->samples},
                         {"violations", f->violations}});
        fcsv.row("\"" + f->statement + "\"", f->at_witness, f->on_samples, f->samples, f->violations);
    }
    json sym = json::array();
    for (const auto& s : symbols) {
        const auto fl = gallery::check_gs_criterion(s); // Inconclusive propagates to exit code 2
        sym.push_back({{"meets_unit_circle", fl.meets_unit_circle},
                       {"crosses_unit_circle", fl.crosses_unit_circle},
                       {"image_inside_open_disk", fl.image_inside_open_disk},
                       {"image_avoids_closed_disk", fl.image_avoids_closed_disk},
                       {"on_circle", witness_json(fl.on_circle)},
                       {"inside", witness_json(fl.inside)},
                       {"outside", witness_json(fl.outside)}});
    }
    RunResult r;
    r.report = {{"cells", cells}, {"facts", facts}, {"pattern_ok", rep.pattern_ok()}, {"facts_ok", rep.facts.all()},
                {"symbols", sym}};
    r.tables["gallery_cells"] = csv.str();
    r.tables["gallery_facts"] = fcsv.str();
    return r;
}

inline RunResult run_lp_demo(const ExperimentConfig& cfg) {
    Params p(cfg.params, "/params");
    const double eps = p.number("eps", 1e-3, 0.0, 1.0, true);
    const double pp = p.number("p", 0.5, 0.0, 0.999999, true);
    const auto cells = static_cast<std::size_t>(p.integer("probe_cells", 8192, 8, 1 << 22));
    const auto per_unit = static_cast<std::size_t>(p.integer("per_unit", 32, 8, 4096));
    const auto t_max = p.integer("t_max", 30, 1, 200);
    const auto halvings = static_cast<std::size_t>(p.integer("halvings", 6, 1, 20));
    p.finish();

    // translation group on L_0(R)
    const auto bump = lp::bump_field(1, 1.5, per_unit);
    std::vector<std::vector<double>> ts;
    for (long long n = 1; n <= t_max; ++n) ts.push_back({static_cast<double>(n)});
    lp::TranslationOptions topt;
    topt.eps = eps;
    topt.halvings = halvings;
    const auto tr = lp::translation_group_check(ts, bump, topt);
    Csv tcsv({"t", "d0_forward", "d0_backward"});
    for (const auto& row : tr.rows) tcsv.row(row.magnitude, row.forward, row.backward);
    Csv ccsv({"halving", "d0"});
    for (std::size_t i = 0; i < tr.continuity.size(); ++i) ccsv.row(i, tr.continuity[i]);

    // kernel density for the dilation tuple on L_p[0,1]
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const double a = u(rng), b = u(rng);
    const auto shape = lp::GridField::unit_cube(1, cells);
    std::vector<lp::GridField> targets{
        lp::GridField::sample(shape.axes(), [](const std::vector<double>&) { return 1.0; }),
        lp::GridField::sample(shape.axes(), [&](const std::vector<double>& x) { return std::sin(a * x[0]) + b; }),
        lp::GridField::sample(shape.axes(), [](const std::vector<double>& x) { return 1.0 / std::sqrt(x[0] + 0.05); }),
    };
    const auto kp = lp::kernel_density_probe(targets, eps, pp);
    Csv kcsv({"target", "delta", "m", "distance", "bound", "power_exact", "power_grid", "annihilated", "resolved"});
    for (std::size_t i = 0; i < kp.entries.size(); ++i) {
        const auto& e = kp.entries[i];
        kcsv.row(i, e.delta, e.m, e.distance, e.bound, e.power_exact, e.power_grid, e.annihilated, e.resolved);
    }
    RunResult r;
    r.report = {{"translation",
                 {{"span", tr.span}, {"beyond_span_ok", tr.beyond_span_ok}, {"decreasing", tr.decreasing},
                  {"continuity_monotone", tr.continuity_monotone}}},
                {"kernel_probe", {{"p", pp}, {"eps", eps}, {"all_ok", kp.all_ok()}}}};
    r.tables["lp_translation"] = tcsv.str();
    r.tables["lp_continuity"] = ccsv.str();
    r.tables["lp_kernel_probe"] = kcsv.str();
    return r;
}

// ---------------------------------------------------------------------------

/// Runs a validated config. Inconclusive maps to exit code 2; other errors
/// propagate to the caller.
inline RunResult run(const ExperimentConfig& cfg) {
    RunResult r;
    try {
        const bool exact = cfg.arith == Arith::rational;
        const auto& s = cfg.subcommand;
        if (s == "steer") r = exact ? run_steer<Rational>(cfg) : run_steer<double>(cfg);
        else if (s == "tensor-steer") r = exact ? run_tensor_steer<Rational>(cfg) : run_tensor_steer<double>(cfg);
        else if (s == "group-build") r = exact ? run_group_build<Rational>(cfg) : run_group_build<double>(cfg);
        else if (s == "mix-cert") r = run_mix_cert(cfg);
        else if (s == "orbit-coverage") r = run_orbit_coverage(cfg);
        else if (s == "gallery") r = run_gallery(cfg);
        else if (s == "lp-demo") r = run_lp_demo(cfg);
        else throw ValidationError("/subcommand", "unknown subcommand");
        r.exit_code = 0;
    } catch (const Inconclusive& e) {
        r = RunResult{};
        r.exit_code = 2;
        r.report = {{"inconclusive", e.what()}};
    }
    r.report["subcommand"] = cfg.subcommand;
    r.report["seed"] = cfg.seed;
    r.report["arith"] = cfg.arith == Arith::rational ? "rational" : "float";
    r.report["params"] = cfg.params;
    r.report["status"] = r.exit_code == 0 ? "ok" : "inconclusive";
    return r;
}

inline std::string file_stem(const std::string& subcommand) {
    std::string s = subcommand;
    std::replace(s.begin(), s.end(), '-', '_');
    return s;
}

/// Writes <stem>.json, one CSV per table and the timing sidecar run_meta.json.
inline void write_artifacts(const RunResult& r, const ExperimentConfig& cfg, const std::filesystem::path& out,
                            const json& meta) {
    std::filesystem::create_directories(out);
    const auto stem = file_stem(cfg.subcommand);
    {
        std::ofstream f(out / (stem + ".json"));
        f << r.report.dump(2) << '\n';
    }
    for (const auto& [name, text] : r.tables) {
        std::ofstream f(out / (name + ".csv"));
        f << text;
    }
    std::ofstream f(out / "run_meta.json");
    f << meta.dump(2) << '\n';
}

} // namespace hypermix::cli
