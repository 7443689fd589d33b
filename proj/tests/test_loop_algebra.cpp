#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cgc/loop_matrix.hpp"
#include "oracles.hpp"

using namespace cgc;
using cplx = std::complex<double>;

namespace {

const TruncationPolicy kPolicy{};

double dist(const Matrix2& x, const Matrix2& y) { return (x - y).norm(); }


}  // namespace

TEST(Matrix2, BasisRelations) {
    using namespace basis;
    EXPECT_LT(dist(e1 * e1, -e0), 1e-15);
    EXPECT_LT(dist(e2 * e2, -e0), 1e-15);
    EXPECT_LT(dist(e3 * e3, -e0), 1e-15);
    // e1 e2 = e3 makes (e1, e2, e3) a quaternion triple
    EXPECT_LT(dist(e1 * e2, e3), 1e-15);
    for (const Matrix2& e : {e0, e1, e2, e3}) EXPECT_TRUE(is_su2(e, 1e-15));
}

TEST(Matrix2, Su2CoordsRoundTrip) {
    std::mt19937 rng(7);
    std::normal_distribution<double> n;
    for (int t = 0; t < 50; ++t) {
        const Vec3 x{n(rng), n(rng), n(rng)};
        const Vec3 y = su2_coords(su2_from_coords(x));
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(x[k], y[k], 1e-15);
    }
}

TEST(Matrix2, Su2ExpMatchesClosedForm) {
    std::mt19937 rng(11);
    std::normal_distribution<double> n;
    for (int t = 0; t < 50; ++t) {
        const Matrix2 x = su2_from_coords({n(rng), n(rng), n(rng)});
        EXPECT_LT(dist(su2_exp(x), oracle::expm(x)), 1e-13);
        EXPECT_TRUE(is_su2(su2_exp(x), 1e-13));
    }
}

TEST(LoopMul, IdentityIsNeutral) {
    std::mt19937 rng(1);
    const LoopMatrix l = oracle::random_twisted(rng, -3, 4, 1.0, false);
    EXPECT_EQ(max_coeff_diff(mul(LoopMatrix::identity(), l, kPolicy), l), 0.0);
    EXPECT_EQ(max_coeff_diff(mul(l, LoopMatrix::identity(), kPolicy), l), 0.0);
}

TEST(LoopMul, OppositeE1MonomialsGiveMinusIdentity) {
    const LoopMatrix p = LoopMatrix::monomial(1, basis::e1);
    const LoopMatrix m = LoopMatrix::monomial(-1, basis::e1);
    const LoopMatrix r = mul(p, m, kPolicy);
    EXPECT_LT(dist(r.coeff(0), -basis::e0), 1e-15);
    EXPECT_LT(max_coeff_diff(r, LoopMatrix::constant(-basis::e0)), 1e-15);
}

TEST(LoopMul, CauchyProductMatchesPointwiseProduct) {
    std::mt19937 rng(2);
    for (int t = 0; t < 20; ++t) {
        const LoopMatrix a = oracle::random_twisted(rng, -3, 3, 1.0, false);
        const LoopMatrix b = oracle::random_twisted(rng, -2, 4, 1.0, false);
        const LoopMatrix ab = mul(a, b, kPolicy);
        EXPECT_TRUE(is_twisted(ab));
        for (cplx z : {cplx(0.7, 0.2), cplx(-1.3, 0.0), cplx(0.0, 1.1)}) {
            const Matrix2 expect = oracle::sum_at(a, z) * oracle::sum_at(b, z);
            EXPECT_LT(dist(evaluate(ab, z), expect), 1e-10 * (1.0 + expect.norm()));
        }
    }
}

TEST(LoopMul, Associative) {
    std::mt19937 rng(3);
    for (int t = 0; t < 20; ++t) {
        const LoopMatrix a = oracle::random_twisted(rng, -3, 3, 1.0, false);
        const LoopMatrix b = oracle::random_twisted(rng, -3, 3, 1.0, false);
        const LoopMatrix c = oracle::random_twisted(rng, -3, 3, 1.0, false);
        const LoopMatrix l = mul(mul(a, b, kPolicy), c, kPolicy);
        const LoopMatrix r = mul(a, mul(b, c, kPolicy), kPolicy);
        EXPECT_LT(max_coeff_diff(l, r), 1e-12 * (1.0 + max_coeff_norm(l)));
    }
}

TEST(LoopMul, TruncationFlagsDroppedMass) {
    const TruncationPolicy narrow{2, 1e-10};
    const LoopMatrix p = LoopMatrix::monomial(2, basis::e3);
    const LoopMatrix r = mul(p, p, narrow);
    EXPECT_TRUE(r.under_resolved());
    EXPECT_LE(r.high_degree(), 2);
}

TEST(LoopInverse, Identity) {
    EXPECT_EQ(max_coeff_diff(inverse(LoopMatrix::identity(), kPolicy), LoopMatrix::identity()), 0.0);
}

TEST(LoopInverse, DiagonalMonomialLoop) {
    // diag(lambda, 1/lambda)
    LoopMatrix l;
    l.coeff_ref(1) = Matrix2{1.0, 0.0, 0.0, 0.0};
    l.coeff_ref(-1) = Matrix2{0.0, 0.0, 0.0, 1.0};
    LoopMatrix expect;
    expect.coeff_ref(-1) = Matrix2{1.0, 0.0, 0.0, 0.0};
    expect.coeff_ref(1) = Matrix2{0.0, 0.0, 0.0, 1.0};
    EXPECT_LT(max_coeff_diff(inverse(l, kPolicy), expect), 1e-14);
}

TEST(LoopInverse, MultiplyBackRandomTwisted) {
    std::mt19937 rng(4);
    for (int t = 0; t < 30; ++t) {
        const LoopMatrix a = oracle::random_twisted(rng, 0, 4, 0.15, true);
        const LoopMatrix ai = inverse(a, kPolicy);
        EXPECT_TRUE(is_twisted(ai));
        // the inverse of a polynomial loop is an infinite series; compare on the window
        // where the truncated tail has not yet reached the product
        const LoopMatrix prod = restrict_degrees(mul(a, ai, kPolicy), -kPolicy.maxDegree, kPolicy.maxDegree - 4);
        EXPECT_LT(max_coeff_diff(prod, LoopMatrix::identity()), 1e-10);
    }
}

TEST(LoopInverse, MultiplyBackRandomUnitary) {
    std::mt19937 rng(5);
    for (int t = 0; t < 20; ++t) {
        const LoopMatrix x = oracle::random_twisted_su2(rng, -2, 2, 0.3);
        const LoopMatrix a = loop_exp(x, kPolicy);
        const LoopMatrix ai = inverse(a, kPolicy);
        EXPECT_TRUE(is_twisted(ai));
        EXPECT_LT(max_coeff_diff(mul(a, ai, kPolicy), LoopMatrix::identity()), 1e-10);
        EXPECT_LT(max_coeff_diff(mul(ai, a, kPolicy), LoopMatrix::identity()), 1e-10);
        // the truncated exponential is accurate on the unit circle
        for (double lam : {1.0, -1.0}) EXPECT_TRUE(is_su2(evaluate(a, lam), 1e-10));
    }
}

TEST(LoopInverse, SingularConstantTermThrows) {
    const LoopMatrix l = LoopMatrix::constant(Matrix2{1.0, 0.0, 0.0, 0.0});
    EXPECT_THROW(inverse(l, kPolicy), SingularLoop);
}

TEST(LoopEvaluate, IdentityAndZeroLambda) {
    for (cplx z : {cplx(1.0), cplx(-3.0), cplx(0.2, 0.9)})
        EXPECT_EQ(dist(evaluate(LoopMatrix::identity(), z), basis::e0), 0.0);
    EXPECT_THROW(evaluate(LoopMatrix::identity(), 0.0), ZeroLambda);
}

TEST(LoopEvaluate, RevolutionCoefficientAtOne) {
    // [[0, -1/lambda + i lambda], [1/lambda + i lambda, 0]]
    LoopMatrix a;
    a.coeff_ref(-1) = Matrix2{0.0, -1.0, 1.0, 0.0};
    a.coeff_ref(1) = Matrix2{0.0, cplx(0.0, 1.0), cplx(0.0, 1.0), 0.0};
    const Matrix2 expect{0.0, cplx(-1.0, 1.0), cplx(1.0, 1.0), 0.0};
    EXPECT_LT(dist(evaluate(a, 1.0), expect), 1e-15);
}

TEST(LoopEvaluate, MatchesNaiveSum) {
    std::mt19937 rng(6);
    for (int t = 0; t < 20; ++t) {
        const LoopMatrix a = oracle::random_twisted(rng, -5, 5, 1.0, false);
        for (cplx z : {cplx(0.6), cplx(-1.4), cplx(0.3, -0.8)}) {
            const Matrix2 e = oracle::sum_at(a, z);
            EXPECT_LT(dist(evaluate(a, z), e), 1e-12 * (1.0 + e.norm()));
        }
    }
}

TEST(LoopDLambda, ConstantAndMonomial) {
    EXPECT_EQ(max_coeff_norm(d_lambda(LoopMatrix::constant(basis::e3))), 0.0);
    const Matrix2 c{1.0, 2.0, 3.0, 4.0};
    EXPECT_EQ(max_coeff_diff(d_lambda(LoopMatrix::monomial(1, c)), LoopMatrix::constant(c)), 0.0);
}

TEST(LoopDLambda, CentralDifferenceIsSecondOrder) {
    std::mt19937 rng(8);
    const LoopMatrix a = oracle::random_twisted(rng, -3, 3, 1.0, false);
    const cplx z0(1.2, 0.3);
    const Matrix2 exact = evaluate(d_lambda(a), z0);
    auto err = [&](double h) {
        const Matrix2 fd = (evaluate(a, z0 + h) - evaluate(a, z0 - h)) * (0.5 / h);
        return dist(fd, exact);
    };
    const double e1 = err(1e-2), e2 = err(5e-3);
    EXPECT_GT(e1 / e2, 3.5);
    EXPECT_LT(e1 / e2, 4.5);
}

TEST(LoopDLambda, TwistingClosureOfLambdaTimesDerivative) {
    std::mt19937 rng(9);
    const LoopMatrix a = oracle::random_twisted(rng, -4, 4, 1.0, false);
    const LoopMatrix d = mul(LoopMatrix::monomial(1, basis::e0), d_lambda(a), kPolicy);
    EXPECT_TRUE(is_twisted(d));
}

TEST(LoopReindex, ScaleOneAndMonomial) {
    std::mt19937 rng(10);
    const LoopMatrix a = oracle::random_twisted(rng, -3, 3, 1.0, false);
    EXPECT_EQ(max_coeff_diff(reindex_scale(a, 1.0), a), 0.0);
    const Matrix2 c{0.0, 1.0, 2.0, 0.0};
    EXPECT_EQ(max_coeff_diff(reindex_scale(LoopMatrix::monomial(1, c), 2.0), LoopMatrix::monomial(1, 2.0 * c)), 0.0);
}

TEST(LoopReindex, EvaluationOracle) {
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> s(-2.0, 2.0);
    for (int t = 0; t < 30; ++t) {
        const LoopMatrix a = oracle::random_twisted(rng, -3, 3, 1.0, false);
        double sc = s(rng);
        if (std::abs(sc) < 0.3) sc = 0.5;
        const cplx z(s(rng), s(rng));
        const Matrix2 expect = oracle::sum_at(a, sc * z);
        EXPECT_LT(dist(evaluate(reindex_scale(a, sc), z), expect), 1e-12 * (1.0 + expect.norm()));
        EXPECT_TRUE(is_twisted(reindex_scale(a, sc)));
    }
}

TEST(LoopTwisting, PatternAndSigmaSymmetry) {
    std::mt19937 rng(13);
    const LoopMatrix a = oracle::random_twisted(rng, -3, 3, 1.0, false);
    EXPECT_TRUE(is_twisted(a));
    // Ad_{diag(1,-1)} L(-lambda) = L(lambda)
    const Matrix2 d{1.0, 0.0, 0.0, -1.0};
    for (cplx z : {cplx(0.4, 0.1), cplx(1.5)}) EXPECT_LT(dist(d * evaluate(a, -z) * d, evaluate(a, z)), 1e-12);
    LoopMatrix bad = a;
    bad.coeff_ref(2).b = 1e-300;
    EXPECT_FALSE(is_twisted(bad));
}

TEST(LoopMul, EvaluationHomomorphismProperty) {
    std::mt19937 rng(14);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int t = 0; t < 100; ++t) {
        const LoopMatrix a = oracle::random_twisted(rng, -3, 3, 1.0, false);
        const LoopMatrix b = oracle::random_twisted(rng, -3, 3, 1.0, false);
        const cplx z(u(rng), u(rng));
        if (std::abs(z) < 0.3) continue;
        const Matrix2 lhs = evaluate(mul(a, b, kPolicy), z);
        const Matrix2 rhs = evaluate(a, z) * evaluate(b, z);
        EXPECT_LT(dist(lhs, rhs), 1e-10 * (1.0 + rhs.norm()));
    }
}

TEST(LoopExp, MatchesClosedFormAtSamples) {
    std::mt19937 rng(15);
    const LoopMatrix x = oracle::random_twisted_su2(rng, -1, 1, 0.5);
    const LoopMatrix e = loop_exp(x, kPolicy);
    for (double lam : {0.5, 1.0, 2.0, -1.3})
        EXPECT_LT(dist(evaluate(e, lam), oracle::expm(evaluate(x, lam))), 1e-10);
}

TEST(TruncationPolicy, Validate) {
    EXPECT_THROW((TruncationPolicy{0, 1e-10}.validate()), Error);
    EXPECT_THROW((TruncationPolicy{4, -1.0}.validate()), Error);
    EXPECT_NO_THROW((TruncationPolicy{1, 0.0}.validate()));
}
