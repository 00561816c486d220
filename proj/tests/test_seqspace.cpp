#include "hypermix/seqspace.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

using namespace hypermix;
using namespace hypermix::seqspace;

namespace {

Vector<double> random_vec(std::mt19937_64& rng, std::size_t n) { return oracle::unit_box(rng, n); }

std::vector<Rational> ones() { return {Rational(1)}; }

// Brute-force A_j from the defining display, independent of build_model:
// A_j x_{gamma(n+e_j)} = (alpha_|n| / alpha_|n|+1) x_{gamma(n)} with exact alphas.
Matrix<Rational> brute_A(std::size_t k, std::size_t G, std::size_t j, const std::vector<Rational>& cycle) {
    const GradedIndex gm(k);
    const std::size_t N = gm.count_up_to(G);
    auto d = [&](std::size_t i) { return cycle[i % cycle.size()]; };
    std::vector<Rational> eps;
    for (std::size_t g = 1; g <= G; ++g) {
        Rational best = -1;
        for (std::size_t i = 0; i < N; ++i)
            if (grade(gm.inverse(i)) == g) {
                const Rational v = abs(d(i));
                if (best < 0 || v < best) best = v;
            }
        eps.push_back(best);
    }
    const auto alpha = build_alpha_sequence_exact(eps, G);
    Matrix<Rational> out(N, N);
    for (std::size_t i = 0; i < N; ++i) {
        auto n = gm.inverse(i);
        if (grade(n) + 1 > G) continue;
        ++n[j];
        out(i, gm.forward(n)) = alpha[grade(n) - 1] / alpha[grade(n)];
    }
    return out;
}

} // namespace

TEST(Gamma, IdentityForK1) {
    const auto g = gamma_bijection(1);
    for (std::size_t n = 0; n < 50; ++n) {
        EXPECT_EQ(g.forward({n}), n);
        EXPECT_EQ(g.inverse(n), MultiIndex{n});
    }
}

TEST(Gamma, GradedLexForK2) {
    const auto g = gamma_bijection(2);
    EXPECT_EQ(g.forward({0, 0}), 0u);
    EXPECT_EQ(g.forward({0, 1}), 1u);
    EXPECT_EQ(g.forward({1, 0}), 2u);
    EXPECT_EQ(g.forward({0, 2}), 3u);
    EXPECT_EQ(g.forward({1, 1}), 4u);
    EXPECT_EQ(g.forward({2, 0}), 5u);
}

TEST(Gamma, RoundTripRandom) {
    std::mt19937_64 rng(11);
    for (std::size_t k = 1; k <= 5; ++k) {
        const auto g = gamma_bijection(k);
        for (int t = 0; t < 1000; ++t) {
            MultiIndex n(k);
            for (auto& v : n) v = rng() % 9;
            EXPECT_EQ(g.inverse(g.forward(n)), n);
        }
        for (std::size_t i = 0; i < 300; ++i) EXPECT_EQ(g.forward(g.inverse(i)), i);
    }
}

TEST(Gamma, GradesAreContiguousAndOrdered) {
    const auto g = gamma_bijection(3);
    MultiIndex prev = g.inverse(0);
    for (std::size_t i = 1; i < g.count_up_to(6); ++i) {
        const auto cur = g.inverse(i);
        const auto gp = grade(prev), gc = grade(cur);
        ASSERT_TRUE(gc == gp || gc == gp + 1);
        if (gc == gp) {
            EXPECT_LT(prev, cur);
        }
        prev = cur;
    }
}

TEST(Gamma, IncompleteGrade) {
    const auto g = gamma_bijection(2);
    EXPECT_EQ(g.grade_for_dimension(10), 3u);
    EXPECT_THROW(g.grade_for_dimension(7), IncompleteGrade);
    EXPECT_THROW(gamma_bijection(0), InvalidArgument);
}

TEST(Biorthogonalize, StandardRowsAreFixed) {
    std::vector<Vector<Rational>> f, c;
    for (std::size_t i = 0; i < 4; ++i) {
        Vector<Rational> e(4, Rational(0));
        e[i] = 1;
        f.push_back(e);
        c.push_back(e);
    }
    const auto b = biorthogonalize(f, c);
    EXPECT_EQ(b.g, f);
    EXPECT_EQ(b.x, c);
    EXPECT_EQ(b.residual, 0.0);
}

TEST(Biorthogonalize, UpperTriangularMatchesElimination) {
    // f rows unit upper triangular, candidates the unit columns in order.
    const std::vector<Vector<Rational>> f{{Rational(1), Rational(2), Rational(-1)},
                                          {Rational(0), Rational(1), Rational(3)},
                                          {Rational(0), Rational(0), Rational(1)}};
    std::vector<Vector<Rational>> c;
    for (std::size_t i = 0; i < 3; ++i) {
        Vector<Rational> e(3, Rational(0));
        e[i] = 1;
        c.push_back(e);
    }
    const auto b = biorthogonalize(f, c);
    EXPECT_EQ(b.residual, 0.0);
    // Oracle: g = (I + alpha) F, and g X is diagonal with nonzero entries.
    for (std::size_t n = 0; n < 3; ++n) {
        Vector<Rational> expect = f[n];
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < 3; ++i) expect[i] += b.alpha(n, j) * f[j][i];
        EXPECT_EQ(b.g[n], expect);
        for (std::size_t j = n; j < 3; ++j) EXPECT_EQ(b.alpha(n, j), 0);
        for (std::size_t kk = 0; kk < 3; ++kk) {
            Rational v = 0;
            for (std::size_t i = 0; i < 3; ++i) v += b.g[n][i] * b.x[kk][i];
            if (kk == n) EXPECT_NE(v, 0);
            else EXPECT_EQ(v, 0);
        }
    }
    // e_0 is picked first (only candidate with f_0 != 0 among the leading ones
    // is e_0, value 1); the correction g_1 = f_1 - 0 f_0 since f_1(e_0) = 0.
    EXPECT_EQ(b.picked.front(), 0u);
    EXPECT_EQ(b.alpha(1, 0), 0);
}

TEST(Biorthogonalize, AgreesWithEigenOnRandom) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Vector<double>> f, c;
        for (int i = 0; i < 5; ++i) f.push_back(random_vec(rng, 5));
        for (int i = 0; i < 7; ++i) c.push_back(random_vec(rng, 5));
        const auto b = biorthogonalize(f, c);
        EXPECT_LE(b.residual, 1e-10);
        // Oracle: given the picked y's, g_n is the unique element of f_n + span f_<n
        // killing y_<n; recompute by Eigen's LU.
        for (std::size_t n = 1; n < 5; ++n) {
            Eigen::MatrixXd sys(n, n);
            Eigen::VectorXd rhs(n);
            for (std::size_t m = 0; m < n; ++m) {
                for (std::size_t j = 0; j < n; ++j) {
                    double s = 0;
                    for (int i = 0; i < 5; ++i) s += f[j][i] * c[b.picked[m]][i];
                    sys(m, j) = s;
                }
                double s = 0;
                for (int i = 0; i < 5; ++i) s += f[n][i] * c[b.picked[m]][i];
                rhs(m) = -s;
            }
            const Eigen::VectorXd coef = sys.fullPivLu().solve(rhs);
            for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(b.alpha(n, j), coef(j), 1e-8);
        }
    }
}

TEST(Biorthogonalize, DependentFunctionals) {
    const std::vector<Vector<double>> f{{1, 2, 3}, {2, 4, 6}, {0, 0, 1}};
    const std::vector<Vector<double>> c{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    EXPECT_THROW(biorthogonalize(f, c), DependentFunctionals);
    const std::vector<Vector<Rational>> fr{{Rational(1), Rational(1)}, {Rational(3), Rational(3)}};
    const std::vector<Vector<Rational>> cr{{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
    EXPECT_THROW(biorthogonalize(fr, cr), DependentFunctionals);
}

TEST(AlphaSequence, EpsOneTelescopes) {
    const std::vector<double> eps(10, 1.0);
    const auto la = build_alpha_sequence(eps, 10);
    for (std::size_t m = 0; m <= 10; ++m)
        EXPECT_NEAR(la[m], static_cast<double>(m * (m - (m > 0 ? 1 : 0))) / 2.0 * std::log(2.0), 1e-12);
    const std::vector<Rational> er(10, Rational(1));
    const auto a = build_alpha_sequence_exact(er, 10);
    for (std::size_t m = 1; m <= 10; ++m) EXPECT_EQ(a[m], Rational(boost::multiprecision::cpp_int(1) << (m * (m - 1) / 2)));
}

TEST(AlphaSequence, EpsTwoUnrolls) {
    const std::vector<Rational> er(3, Rational(2));
    const auto a = build_alpha_sequence_exact(er, 3);
    EXPECT_EQ(a[1], Rational(1, 2));
    EXPECT_EQ(a[2], Rational(1, 2));
    EXPECT_EQ(a[3], Rational(1));
    const std::vector<double> e(3, 2.0);
    const auto la = build_alpha_sequence(e, 3);
    EXPECT_NEAR(std::exp(la[1]), 0.5, 1e-15);
    EXPECT_NEAR(std::exp(la[2]), 0.5, 1e-15);
    EXPECT_NEAR(std::exp(la[3]), 1.0, 1e-15);
}

TEST(AlphaSequence, EdgeCases) {
    EXPECT_EQ(build_alpha_sequence({}, 0), std::vector<double>{0.0});
    const std::vector<double> bad{1.0, 0.0};
    EXPECT_THROW(build_alpha_sequence(bad, 2), NonpositiveEpsilon);
    const std::vector<Rational> badr{Rational(-1)};
    EXPECT_THROW(build_alpha_sequence_exact(badr, 1), NonpositiveEpsilon);
    // log space survives where 2^{m^2/2} would overflow a double
    const std::vector<double> eps(80, 1.0);
    const auto la = build_alpha_sequence(eps, 80);
    EXPECT_TRUE(std::isfinite(la.back()));
    EXPECT_GT(la.back() / std::log(2.0), 1024.0);
}

TEST(AlphaSequence, RecursionInequalityHolds) {
    const std::vector<double> eps{0.5, 0.25, 1.0, 0.125, 0.75};
    for (const double slack : {1.0, 1.5, 4.0}) {
        const auto la = build_alpha_sequence(eps, eps.size(), slack);
        for (std::size_t m = 0; m < eps.size(); ++m)
            EXPECT_GE(la[m + 1] + 1e-12, static_cast<double>(m) * std::log(2.0) + la[m] - std::log(eps[m]));
    }
}

TEST(Model, WeightedBackwardShiftForK1) {
    const auto m = build_model<Rational>(1, 8, ones());
    ASSERT_EQ(m.max_grade, 7u);
    const auto a = m.A[0].dense();
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 8; ++c) {
            const Rational expect = (c == r + 1) ? Rational(1) / Rational(boost::multiprecision::cpp_int(1) << r) : Rational(0);
            EXPECT_EQ(a(r, c), expect);
        }
}

TEST(Model, MatchesDefiningDisplay) {
    const std::vector<Rational> cycle{Rational(1), Rational(1, 2), Rational(-3, 4), Rational(1, 3)};
    for (std::size_t k = 1; k <= 3; ++k) {
        const GradedIndex gm(k);
        const auto m = build_model<Rational>(k, gm.count_up_to(4), cycle);
        for (std::size_t j = 0; j < k; ++j) EXPECT_EQ(m.A[j].dense(), brute_A(k, 4, j, cycle));
    }
}

TEST(Model, AnnihilatesZeroAndRespectsBasisMaps) {
    const auto m = build_model<Rational>(2, 15, ones());
    for (std::size_t j = 0; j < 2; ++j) {
        for (std::size_t i = 0; i < m.N; ++i) {
            const auto n = m.gamma.inverse(i);
            Vector<Rational> e(m.N, Rational(0));
            e[i] = 1;
            const auto out = m.A[j].apply(e);
            if (n[j] == 0) {
                for (const auto& v : out) EXPECT_EQ(v, 0);
            } else {
                auto t = n;
                --t[j];
                for (std::size_t r = 0; r < m.N; ++r)
                    EXPECT_EQ(out[r], r == m.gamma.forward(t) ? m.alpha_ratio[grade(t)] : Rational(0));
            }
        }
    }
}

TEST(Model, PairwiseCommutationExact) {
    const std::vector<Rational> cycle{Rational(1), Rational(2, 3), Rational(1, 5)};
    for (std::size_t k = 2; k <= 3; ++k) {
        const GradedIndex gm(k);
        const auto m = build_model<Rational>(k, gm.count_up_to(6), cycle);
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t l = j + 1; l < k; ++l) {
                const auto aj = m.A[j].dense(), al = m.A[l].dense();
                EXPECT_EQ(aj * al, al * aj);
            }
    }
}

TEST(Model, DoubleLoweringIdentity) {
    const std::vector<Rational> cycle{Rational(1), Rational(1, 2)};
    const auto m = build_model<Rational>(2, 21, cycle);
    // every grade >= 1 holds an odd index, so eps_m = 1/2 throughout
    const auto alpha = build_alpha_sequence_exact(std::vector<Rational>(m.max_grade, Rational(1, 2)), m.max_grade);
    for (std::size_t i = 0; i < m.N; ++i) {
        const auto n = m.gamma.inverse(i);
        if (n[0] < 1 || n[1] < 1) continue;
        Vector<Rational> e(m.N, Rational(0));
        e[i] = 1;
        const auto out = m.A[0].apply(m.A[1].apply(e));
        auto t = n;
        --t[0];
        --t[1];
        const Rational expect = alpha[grade(n) - 2] / alpha[grade(n)];
        for (std::size_t r = 0; r < m.N; ++r) EXPECT_EQ(out[r], r == m.gamma.forward(t) ? expect : Rational(0));
    }
}

TEST(Model, CoefficientBound) {
    const std::vector<double> cycle{1.0, 0.5, 0.8, 0.25};
    const auto eq = build_model<double>(3, GradedIndex(3).count_up_to(5), cycle);
    for (const auto& c : eq.coeffs) EXPECT_GT(std::abs(c.value), 0.0);
    // equality choice reaches the bound where |d| attains eps
    EXPECT_NEAR(max_scaled_coefficient(eq), 1.0, 1e-15);
    const auto strict = build_model<double>(3, GradedIndex(3).count_up_to(5), cycle, 2.0);
    EXPECT_LT(max_scaled_coefficient(strict), 1.0);
    for (std::size_t j = 0; j < 3; ++j) {
        double sum = 0;
        for (const auto& c : strict.coeffs)
            if (c.axis == j) sum += std::abs(c.value);
        EXPECT_LE(sum, strict.a());
    }
    EXPECT_EQ(strict.a(), 8.0);
}

TEST(Model, Rejections) {
    EXPECT_THROW(build_model<double>(2, 7, {1.0}), IncompleteGrade);
    EXPECT_THROW(build_model<double>(2, 6, {0.0}), InvalidArgument);
    EXPECT_THROW(build_model<double>(2, 6, {1.5}), InvalidArgument);
    EXPECT_THROW(build_model<double>(2, 6, {1.0}, 0.5), InvalidArgument);
}

TEST(SeriesOperator, ZeroAndRankOne) {
    const auto m = build_model<double>(2, 10, {1.0, 0.5});
    const std::vector<double> a0(3, 0.0);
    const std::vector<std::size_t> am{0, 1, 2}, bm{3, 4, 5};
    EXPECT_EQ(build_operator_from_series<double>(m, a0, am, bm).nnz(), 0u);
    const std::vector<double> a1{1.0};
    const std::vector<std::size_t> z{0};
    const auto op = build_operator_from_series<double>(m, a1, z, z);
    EXPECT_EQ(op.nnz(), 1u);
    EXPECT_EQ(op.entry(0, 0), m.diagonal[0]);
}

TEST(SeriesOperator, BoundHoldsOnRandomVectors) {
    std::mt19937_64 rng(3);
    const auto m = build_model<double>(2, 21, {1.0, 0.5, 0.3, 0.9});
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> a(30);
        std::vector<std::size_t> am(30), bm(30);
        double norm = 0;
        for (std::size_t i = 0; i < 30; ++i) {
            a[i] = oracle::uniform(rng, -1, 1);
            norm += std::abs(a[i]);
            am[i] = rng() % m.N;
            bm[i] = rng() % m.N;
        }
        for (auto& v : a) v /= norm; // ||a|| = 1
        const auto op = build_operator_from_series<double>(m, a, am, bm);
        std::vector<Vector<double>> samples;
        for (int s = 0; s < 200; ++s) samples.push_back(random_vec(rng, m.N));
        EXPECT_LE(series_bound_ratio(m, op, samples), 1.0 + 1e-9);
    }
    // the A_j themselves obey q(A_j x) <= a p(x)
    std::vector<Vector<double>> samples;
    for (int s = 0; s < 200; ++s) samples.push_back(random_vec(rng, m.N));
    for (const auto& aj : m.A) EXPECT_LE(series_bound_ratio(m, aj, samples), m.a());
}

TEST(Group, ZeroParameterIsIdentity) {
    std::mt19937_64 rng(1);
    const auto m = build_model<double>(2, 15, {1.0});
    const auto x = random_vec(rng, m.N);
    const auto r = exp_group_apply(m, Vector<double>{0.0, 0.0}, x);
    EXPECT_EQ(r.value, x);
    EXPECT_EQ(r.tail_bound, 0.0);
}

TEST(Group, MatchesDenseExpmOracle) {
    std::mt19937_64 rng(2);
    for (const auto& [k, G] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 30}, {2, 6}, {3, 4}}) {
        const GradedIndex gm(k);
        const auto m = build_model<Complex>(k, gm.count_up_to(G), {Complex(1), Complex(0.5), Complex(0.8)});
        ASSERT_LE(m.N, 64u);
        for (int trial = 0; trial < 5; ++trial) {
            const auto z = oracle::unit_box_c(rng, k);
            Vector<Complex> zz(z.begin(), z.end());
            for (auto& v : zz) v *= 3.0;
            const auto x = oracle::unit_box_c(rng, m.N);
            Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(m.N, m.N);
            for (std::size_t j = 0; j < k; ++j) gen += zz[j] * oracle::to_eigen(m.A[j].dense());
            const Eigen::MatrixXcd e = oracle::dense_expm(gen);
            Eigen::VectorXcd xv(m.N);
            for (std::size_t i = 0; i < m.N; ++i) xv(i) = x[i];
            const Eigen::VectorXcd ref = e * xv;
            const auto r = exp_group_apply(m, zz, Vector<Complex>(x.begin(), x.end()), 1e-10);
            double diff = 0;
            for (std::size_t i = 0; i < m.N; ++i) diff = std::max(diff, std::abs(ref(i) - r.value[i]));
            EXPECT_LE(diff, 1e-9);
        }
    }
}

TEST(Group, GroupLaw) {
    std::mt19937_64 rng(4);
    const auto m = build_model<double>(3, GradedIndex(3).count_up_to(6), {1.0, 0.4, 0.7});
    const double tol = 1e-10;
    for (int trial = 0; trial < 50; ++trial) {
        const auto z = oracle::unit_box(rng, 3), w = oracle::unit_box(rng, 3);
        Vector<double> zw(3);
        for (int j = 0; j < 3; ++j) zw[j] = z[j] + w[j];
        const auto x = random_vec(rng, m.N);
        const auto inner = exp_group_apply(m, w, x, tol);
        const auto lhs = exp_group_apply(m, z, inner.value, tol);
        const auto rhs = exp_group_apply(m, zw, x, tol);
        EXPECT_LE(m.q(subtract(lhs.value, rhs.value)), 2 * tol);
    }
}

TEST(Group, GroupLawExactInRationalMode) {
    const auto m = build_model<Rational>(2, 15, {Rational(1), Rational(1, 2)});
    Vector<Rational> x(m.N);
    for (std::size_t i = 0; i < m.N; ++i) x[i] = Rational(static_cast<long long>(i % 5) - 2, 3);
    const Vector<Rational> z{Rational(3, 2), Rational(-1)}, w{Rational(1, 7), Rational(2)};
    const Vector<Rational> zw{z[0] + w[0], z[1] + w[1]};
    const auto lhs = exp_group_apply(m, z, exp_group_apply(m, w, x).value);
    EXPECT_TRUE(lhs.exact);
    EXPECT_EQ(lhs.value, exp_group_apply(m, zw, x).value);
}

TEST(Group, TailBoundIsCertified) {
    // A model deep enough that the tolerance stops the series before nilpotency.
    std::mt19937_64 rng(8);
    const auto m = build_model<double>(1, 80, {1.0});
    const auto x = random_vec(rng, m.N);
    const Vector<double> z{0.05};
    const auto cut = exp_group_apply(m, z, x, 1e-6);
    ASSERT_FALSE(cut.exact);
    EXPECT_LT(cut.tail_bound, 1e-6);
    const auto full = exp_group_apply(m, z, x, 1e-300);
    EXPECT_LE(m.q(subtract(full.value, cut.value)), cut.tail_bound + 1e-15);
}

TEST(Group, UniformContinuityBound) {
    std::mt19937_64 rng(6);
    const auto m = build_model<double>(2, 28, {1.0, 0.3, 0.6});
    for (int trial = 0; trial < 100; ++trial) {
        auto z = oracle::unit_box(rng, 2);
        const double scale = oracle::uniform(rng, 0.0, 2.0) / (std::abs(z[0]) + std::abs(z[1]));
        for (auto& v : z) v *= scale;
        const auto x = random_vec(rng, m.N);
        const auto r = exp_group_apply(m, z, x, 1e-14);
        const double lhs = m.q(subtract(r.value, x));
        EXPECT_LE(lhs, continuity_bound<double>(m, z, x));
    }
}

TEST(Group, ExpTail) {
    EXPECT_EQ(exp_tail(0.0, 3), 0.0);
    EXPECT_NEAR(exp_tail(1.0, 0), std::exp(1.0) - 1.0, 1e-15);
    EXPECT_NEAR(exp_tail(2.0, 2), std::exp(2.0) - 1.0 - 2.0 - 2.0, 1e-13);
    EXPECT_TRUE(std::isinf(exp_tail(1000.0, 1)));
}

TEST(Analyticity, CauchyRiemannResidualIsSecondOrder) {
    const auto m = build_model<Complex>(2, 21, {Complex(1), Complex(0.5)});
    Vector<Complex> x(m.N, Complex(0));
    for (std::size_t i = 0; i < m.N; ++i) x[i] = Complex(1.0 / (1.0 + static_cast<double>(i)), 0.3);
    const Vector<Complex> z0{Complex(0.3, -0.2), Complex(-0.1, 0.4)};
    const auto probe = cauchy_riemann_probe(m, z0, x, 0, 0, 0.2, 4);
    ASSERT_EQ(probe.ratio.size(), 4u);
    for (const double r : probe.ratio) {
        EXPECT_GE(r, 3.0);
        EXPECT_LE(r, 5.0);
    }
}

TEST(KerDensity, UnionSpansTruncation) {
    for (const auto& [k, G] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 5}, {2, 3}, {3, 1}}) {
        const auto rep = ker_density_check(k, G, {Rational(1), Rational(1, 2)});
        EXPECT_TRUE(rep.dense) << "k=" << k << " G=" << G << " rank " << rep.rank << " of " << rep.N;
        EXPECT_EQ(rep.ambient_N, GradedIndex(k).count_up_to(2 * G + k));
    }
}
