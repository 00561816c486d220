#include "hypermix/tensor.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hypermix;
using namespace hypermix::tensor;

namespace {

Vector<double> basis(const TensorTuple& t, const MultiIndex& m) {
    Vector<double> e(t.size(), 0.0);
    e[t.flat_index(m)] = 1.0;
    return e;
}

std::vector<Vector<double>> diagonal_sequence(std::size_t k, int first, int last) {
    std::vector<Vector<double>> zs;
    for (int m = first; m <= last; ++m) zs.emplace_back(k, std::pow(10.0, m));
    return zs;
}

// Brute-force kappa(n,T): kernel of the stacked T_j^{2n_j} by Eigen's LU, then
// pushed through the product of powers.
Eigen::MatrixXd brute_kappa(const TensorTuple& t, const MultiIndex& n) {
    const auto d = static_cast<Eigen::Index>(t.size());
    std::vector<Eigen::MatrixXd> ops;
    for (std::size_t j = 0; j < t.k(); ++j) ops.push_back(oracle::to_eigen(t.operator_matrix<double>(j)));
    Eigen::MatrixXd stacked(0, d);
    for (std::size_t j = 0; j < t.k(); ++j) {
        Eigen::MatrixXd p = Eigen::MatrixXd::Identity(d, d);
        for (std::size_t s = 0; s < 2 * n[j]; ++s) p = ops[j] * p;
        Eigen::MatrixXd grown(stacked.rows() + d, d);
        grown << stacked, p;
        stacked = grown;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(stacked);
    Eigen::MatrixXd ker = lu.kernel();
    Eigen::MatrixXd img = ker;
    for (std::size_t j = 0; j < t.k(); ++j)
        for (std::size_t s = 0; s < n[j]; ++s) img = ops[j] * img;
    return img;
}

Eigen::MatrixXd columns_of(const TensorTuple& t, const std::vector<std::size_t>& flat) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.size()), static_cast<Eigen::Index>(flat.size()));
    for (std::size_t i = 0; i < flat.size(); ++i) m(static_cast<Eigen::Index>(flat[i]), static_cast<Eigen::Index>(i)) = 1.0;
    return m;
}

bool same_span(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd joined(a.rows(), a.cols() + b.cols());
    joined << a, b;
    const auto ra = oracle::eigen_rank(a), rb = oracle::eigen_rank(b);
    return ra == rb && oracle::eigen_rank(joined) == ra;
}

} // namespace

TEST(TensorTuple, SingleFactorIsTheShift) {
    const auto t = build_tensor_tuple({1});
    EXPECT_EQ(t.size(), 2u);
    EXPECT_EQ(t.operator_matrix<Rational>(0), jordan::ShiftBlock(1).shift_matrix<Rational>());
}

TEST(TensorTuple, MixedShiftsOnTwoByTwo) {
    const auto t = build_tensor_tuple({2, 2});
    EXPECT_EQ(t.size(), 16u);
    const auto e22 = basis(t, {2, 2});
    const auto a = t.apply_shift<double>(0, t.apply_shift<double>(1, e22));
    const auto b = t.apply_shift<double>(1, t.apply_shift<double>(0, e22));
    EXPECT_EQ(a, basis(t, {1, 1}));
    EXPECT_EQ(b, basis(t, {1, 1}));
}

TEST(TensorTuple, TwoBlocksSquareToZero) {
    const auto t = build_tensor_tuple({1, 1, 1});
    for (std::size_t j = 0; j < 3; ++j) {
        const auto m = t.operator_matrix<Rational>(j);
        EXPECT_EQ(m * m, Matrix<Rational>(8, 8));
        EXPECT_NE(m, Matrix<Rational>(8, 8));
    }
}

TEST(TensorTuple, ShiftRuleAndCommutation) {
    for (const auto& dims : std::vector<std::vector<std::size_t>>{{3}, {2, 3}, {1, 2, 2}, {2, 1, 1, 2}}) {
        const auto t = build_tensor_tuple(dims);
        for (std::size_t flat = 0; flat < t.size(); ++flat) {
            const auto m = t.multi_index(flat);
            EXPECT_EQ(t.flat_index(m), flat);
            for (std::size_t j = 0; j < t.k(); ++j) {
                const auto tgt = t.shift_target(j, flat);
                if (m[j] == 1) {
                    EXPECT_FALSE(tgt.has_value());
                } else {
                    auto mm = m;
                    --mm[j];
                    EXPECT_EQ(*tgt, t.flat_index(mm));
                }
            }
        }
        for (std::size_t j = 0; j < t.k(); ++j)
            for (std::size_t l = 0; l < t.k(); ++l) {
                const auto a = t.operator_matrix<Rational>(j), b = t.operator_matrix<Rational>(l);
                EXPECT_EQ(a * b, b * a);
            }
    }
}

TEST(TensorTuple, CapExceeded) {
    EXPECT_THROW(build_tensor_tuple({32, 32, 2}), CapExceeded);
    EXPECT_NO_THROW(build_tensor_tuple({16, 16, 2}, 4096));
    EXPECT_THROW(build_tensor_tuple({2, 2}, 15), CapExceeded);
    EXPECT_THROW(build_tensor_tuple({}), InvalidArgument);
    EXPECT_THROW(build_tensor_tuple({2, 0}), InvalidArgument);
}

TEST(Kappa, SingleBlock) {
    const auto t = build_tensor_tuple({2});
    const auto k = compute_kappa(t, {2});
    EXPECT_EQ(k.basis, (std::vector<std::size_t>{0, 1}));
    EXPECT_TRUE(same_span(brute_kappa(t, {2}), columns_of(t, k.basis)));
}

TEST(Kappa, CornerOfTwoByTwo) {
    const auto t = build_tensor_tuple({2, 2});
    const auto k = compute_kappa(t, {1, 1});
    EXPECT_EQ(k.basis, std::vector<std::size_t>{t.flat_index({1, 1})});
    EXPECT_TRUE(same_span(brute_kappa(t, {1, 1}), columns_of(t, k.basis)));
}

TEST(Kappa, FullIndexGivesE) {
    for (const auto& dims : std::vector<std::vector<std::size_t>>{{3}, {2, 2}, {3, 2}, {1, 2, 2}}) {
        const auto t = build_tensor_tuple(dims);
        const auto k = compute_kappa(t, dims);
        EXPECT_EQ(k.basis, t.e_block());
    }
}

TEST(Kappa, MatchesBruteForceEverywhere) {
    const auto t = build_tensor_tuple({3, 2});
    for (std::size_t a = 1; a <= 3; ++a)
        for (std::size_t b = 1; b <= 2; ++b) {
            const auto k = compute_kappa(t, {a, b});
            EXPECT_TRUE(same_span(brute_kappa(t, {a, b}), columns_of(t, k.basis)));
            EXPECT_EQ(k.basis.size(), a * b);
        }
}

TEST(Kappa, RejectsOutOfRange) {
    const auto t = build_tensor_tuple({2, 2});
    EXPECT_THROW(compute_kappa(t, {3, 1}), IndexOutOfRange);
    EXPECT_THROW(compute_kappa(t, {0, 1}), IndexOutOfRange);
    EXPECT_THROW(compute_kappa(t, {1}), IndexOutOfRange);
}

TEST(Kappa, UnionSpansE) {
    const auto t = build_tensor_tuple({3, 2});
    std::vector<std::size_t> all;
    for (std::size_t a = 1; a <= 3; ++a)
        for (std::size_t b = 1; b <= 2; ++b) {
            const auto k = compute_kappa(t, {a, b});
            all.insert(all.end(), k.basis.begin(), k.basis.end());
        }
    EXPECT_TRUE(same_span(columns_of(t, all), columns_of(t, t.e_block())));
}

TEST(ExpLinearCombination, ZeroIsIdentity) {
    const auto t = build_tensor_tuple({2, 1});
    const std::vector<Rational> z{0, 0};
    EXPECT_EQ(exp_linear_combination<Rational>(t, z), Matrix<Rational>::identity(t.size()));
}

TEST(ExpLinearCombination, DecouplesSingleAxis) {
    const auto t = build_tensor_tuple({2, 2});
    const std::vector<Rational> z{Rational(3) / 2, 0};
    const auto expected = oracle::power_series_exp(t.operator_matrix<Rational>(0), Rational(3) / 2, 5);
    EXPECT_EQ(exp_linear_combination<Rational>(t, z), expected);
}

TEST(ExpLinearCombination, KroneckerOfFactorExponentials) {
    const auto t = build_tensor_tuple({1, 1});
    const std::vector<double> z{1.0, 1.0};
    const auto dense = oracle::to_eigen(exp_linear_combination<double>(t, z));
    const auto f = oracle::to_eigen(jordan::exp_shift(jordan::ShiftBlock(1), 1.0));
    const Eigen::MatrixXd kron = Eigen::kroneckerProduct(f, f);
    EXPECT_LE((dense - kron).cwiseAbs().maxCoeff(), 1e-15);

    const auto t2 = build_tensor_tuple({2, 3});
    const std::vector<double> z2{0.7, -1.3};
    const Eigen::MatrixXd k2 = Eigen::kroneckerProduct(oracle::to_eigen(jordan::exp_shift(jordan::ShiftBlock(2), 0.7)),
                                                       oracle::to_eigen(jordan::exp_shift(jordan::ShiftBlock(3), -1.3)));
    EXPECT_LE((oracle::to_eigen(exp_linear_combination<double>(t2, z2)) - k2).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(ExpLinearCombination, GroupLawExact) {
    std::mt19937_64 rng(41);
    const std::vector<std::vector<std::size_t>> shapes{{2, 2}, {1, 3}, {2, 1, 1}, {3, 2}};
    for (int trial = 0; trial < 50; ++trial) {
        const auto t = build_tensor_tuple(shapes[trial % shapes.size()]);
        std::vector<Rational> z(t.k()), w(t.k()), zw(t.k());
        for (std::size_t j = 0; j < t.k(); ++j) {
            z[j] = Rational(static_cast<long long>(rng() % 19) - 9) / Rational(static_cast<long long>(rng() % 4) + 1);
            w[j] = Rational(static_cast<long long>(rng() % 19) - 9) / Rational(static_cast<long long>(rng() % 4) + 1);
            zw[j] = z[j] + w[j];
        }
        EXPECT_EQ(exp_linear_combination<Rational>(t, z) * exp_linear_combination<Rational>(t, w),
                  exp_linear_combination<Rational>(t, zw));
    }
}

TEST(ExpLinearCombination, GroupLawFloat) {
    std::mt19937_64 rng(43);
    const std::vector<std::vector<std::size_t>> shapes{{2, 2}, {4, 4}, {2, 2, 2}, {8, 8}};
    for (int trial = 0; trial < 50; ++trial) {
        const auto t = build_tensor_tuple(shapes[trial % shapes.size()]);
        std::vector<Complex> z(t.k()), w(t.k()), zw(t.k());
        for (std::size_t j = 0; j < t.k(); ++j) {
            z[j] = Complex(oracle::uniform(rng, -2, 2), oracle::uniform(rng, -2, 2));
            w[j] = Complex(oracle::uniform(rng, -2, 2), oracle::uniform(rng, -2, 2));
            zw[j] = z[j] + w[j];
        }
        const auto lhs = exp_linear_combination<Complex>(t, z) * exp_linear_combination<Complex>(t, w);
        const auto rhs = exp_linear_combination<Complex>(t, zw);
        EXPECT_LE(max_abs(lhs - rhs), 1e-12 * max_abs(rhs));
    }
}

TEST(ExpLinearCombination, VectorApplyAgreesWithDense) {
    std::mt19937_64 rng(47);
    const auto t = build_tensor_tuple({3, 2});
    for (int trial = 0; trial < 10; ++trial) {
        const std::vector<Complex> z{Complex(oracle::uniform(rng, -3, 3), 0.5), Complex(0.2, oracle::uniform(rng, -3, 3))};
        const auto x = oracle::unit_box_c(rng, t.size());
        const auto dense = exp_linear_combination<Complex>(t, z) * x;
        const auto fast = apply_exp<Complex>(t, z, x);
        EXPECT_LE(max_abs(subtract(dense, fast)), 1e-12 * max_abs(dense));
    }
}

TEST(SteerTensor, SingleFactorMatchesScalarSolver) {
    const auto t = build_tensor_tuple({3});
    const Vector<double> u{1.0, -0.5, 0.25, 0, 0, 0}, v{0.3, 0.0, -1.0, 0, 0, 0};
    const auto zs = diagonal_sequence(1, 1, 3);
    const auto res = steer_tensor<double>(t, u, v, zs);
    for (std::size_t m = 0; m < zs.size(); ++m) {
        const auto ref = jordan::steer<double>(3, zs[m][0], {1.0, -0.5, 0.25}, {0.3, 0.0, -1.0});
        ASSERT_TRUE(res.x[m].has_value());
        for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR((*res.x[m])[i], ref.x[i], 1e-12);
    }
}

TEST(SteerTensor, ZeroDataGivesZero) {
    const auto t = build_tensor_tuple({2, 2});
    const Vector<double> zero(t.size(), 0.0);
    const auto res = steer_tensor<double>(t, zero, zero, diagonal_sequence(2, 1, 4));
    for (std::size_t m = 0; m < 4; ++m) {
        EXPECT_EQ(*res.x[m], zero);
        EXPECT_EQ(res.residual_x[m], 0.0);
        EXPECT_EQ(res.residual_image[m], 0.0);
    }
}

TEST(SteerTensor, CornerToCornerConverges) {
    const auto t = build_tensor_tuple({2, 2});
    const auto u = basis(t, {1, 1}), v = basis(t, {2, 2});
    const auto res = steer_tensor<double>(t, u, v, diagonal_sequence(2, 1, 5));
    EXPECT_LT(res.residual_x.back(), 1e-3);
    EXPECT_LT(res.residual_image.back(), 1e-3);
    EXPECT_TRUE(res.decreasing_tail);
}

TEST(SteerTensor, MixedLargeAndSmallCoordinates) {
    // Second coordinate stays bounded: steering goes through the first factor.
    const auto t = build_tensor_tuple({2, 2});
    std::vector<Vector<double>> zs;
    for (int m = 1; m <= 5; ++m) zs.push_back({std::pow(10.0, m), 0.75});
    std::mt19937_64 rng(53);
    Vector<double> u(t.size(), 0.0), v(t.size(), 0.0);
    for (auto f : t.e_block()) {
        u[f] = oracle::uniform(rng, -1, 1);
        v[f] = oracle::uniform(rng, -1, 1);
    }
    const auto res = steer_tensor<double>(t, u, v, zs);
    EXPECT_LT(res.residual_x.back(), 1e-3);
    EXPECT_LT(res.residual_image.back(), 1e-3);
    EXPECT_TRUE(res.no_large_coordinate.empty());
}

TEST(SteerTensor, ReportsNoLargeCoordinate) {
    const auto t = build_tensor_tuple({1, 1});
    const auto u = basis(t, {1, 1});
    const std::vector<Vector<double>> zs{{1.0, 2.0}, {100.0, 0.0}};
    const auto res = steer_tensor<double>(t, u, u, zs);
    EXPECT_EQ(res.no_large_coordinate, std::vector<std::size_t>{0});
    EXPECT_FALSE(res.x[0].has_value());
    EXPECT_TRUE(std::isnan(res.residual_x[0]));
    EXPECT_TRUE(res.x[1].has_value());
}

TEST(SteerTensor, RejectsDataOutsideE) {
    const auto t = build_tensor_tuple({1, 1});
    const auto bad = basis(t, {2, 1});
    const Vector<double> zero(t.size(), 0.0);
    EXPECT_THROW(steer_tensor<double>(t, bad, zero, diagonal_sequence(2, 1, 2)), InvalidArgument);
}

TEST(SteerTensor, SigmaLinearity) {
    std::mt19937_64 rng(59);
    const auto t = build_tensor_tuple({2, 2});
    const auto zs = diagonal_sequence(2, 1, 5);
    auto random_e = [&] {
        Vector<double> x(t.size(), 0.0);
        for (auto f : t.e_block()) x[f] = oracle::uniform(rng, -1, 1);
        return x;
    };
    for (int trial = 0; trial < 10; ++trial) {
        const auto u1 = random_e(), v1 = random_e(), u2 = random_e(), v2 = random_e();
        const double a = oracle::uniform(rng, -2, 2), b = oracle::uniform(rng, -2, 2);
        Vector<double> u(t.size()), v(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            u[i] = a * u1[i] + b * u2[i];
            v[i] = a * v1[i] + b * v2[i];
        }
        const auto r1 = steer_tensor<double>(t, u1, v1, zs);
        const auto r2 = steer_tensor<double>(t, u2, v2, zs);
        const auto r = steer_tensor<double>(t, u, v, zs);
        for (std::size_t m = 0; m < zs.size(); ++m) {
            EXPECT_LE(r.residual_x[m], std::abs(a) * r1.residual_x[m] + std::abs(b) * r2.residual_x[m] + 1e-12);
            EXPECT_LE(r.residual_image[m],
                      std::abs(a) * r1.residual_image[m] + std::abs(b) * r2.residual_image[m] + 1e-9);
        }
    }
}

TEST(SteerTensor, KernelVectorsSteerBothWays) {
    for (const auto& dims : std::vector<std::vector<std::size_t>>{{2, 2}, {3, 3}, {3, 1}}) {
        const auto t = build_tensor_tuple(dims);
        for (std::size_t a = 1; a <= dims[0]; ++a)
            for (std::size_t b = 1; b <= dims[1]; ++b) {
                const auto kap = compute_kappa(t, {a, b});
                Vector<double> x(t.size(), 0.0);
                for (auto f : kap.basis) x[f] = 1.0 / static_cast<double>(1 + f);
                const Vector<double> zero(t.size(), 0.0);
                const auto to = steer_tensor<double>(t, zero, x, diagonal_sequence(2, 1, 5));
                const auto from = steer_tensor<double>(t, x, zero, diagonal_sequence(2, 1, 5));
                EXPECT_LT(std::max(to.residual_x.back(), to.residual_image.back()), 1e-3);
                EXPECT_LT(std::max(from.residual_x.back(), from.residual_image.back()), 1e-3);
            }
    }
}

TEST(SteerTensor, FactorwiseImageIsExactInRationalMode) {
    const auto t = build_tensor_tuple({2, 2});
    Vector<Rational> u(t.size(), Rational(0)), v(t.size(), Rational(0));
    const auto blk = t.e_block();
    for (std::size_t i = 0; i < blk.size(); ++i) {
        u[blk[i]] = Rational(static_cast<long long>(i) + 1) / 3;
        v[blk[i]] = Rational(2) - Rational(static_cast<long long>(i));
    }
    const std::vector<Vector<Rational>> zs{{Rational(20), Rational(1, 2)}, {Rational(-300), Rational(400)}};
    const auto res = steer_tensor<Rational>(t, u, v, zs);
    for (std::size_t m = 0; m < zs.size(); ++m)
        EXPECT_EQ(*res.image[m], apply_exp<Rational>(t, zs[m], *res.x[m]));
}
