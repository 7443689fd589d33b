#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cgc/dalembert.hpp"
#include "oracles.hpp"

using namespace cgc;
using cplx = std::complex<double>;

namespace {

const TruncationPolicy kPolicy{};
// Random factors have inverses that decay slowly; give the split room to converge.
const TruncationPolicy kWide{48, 1e-10};

double dist(const Matrix2& x, const Matrix2& y) { return (x - y).norm(); }

GridSpec square(int n, double lo = 0.0, double hi = 2.0) {
    GridSpec g;
    g.uRange = {lo, hi};
    g.vRange = {lo, hi};
    g.nU = n;
    g.nV = n;
    return g;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> s;
    for (int k = 0; k < n; ++k) s.push_back(a + (b - a) * k / (n - 1));
    return s;
}

const std::vector<double> kRealLambdas = {-2.0, -1.7, -1.4, -1.1, -0.9, -0.75, -0.6, -0.5,
                                          0.5,  0.6,  0.75, 0.9,  1.1, 1.4,   1.7,  2.0};

}  // namespace

TEST(GridSpec, ValidationAndBaseIndex) {
    GridSpec g = square(5, -1.0, 1.0);
    EXPECT_NO_THROW(g.validate());
    EXPECT_EQ(g.base_index(), std::make_pair(2, 2));
    g.nU = 1;
    EXPECT_THROW(g.validate(), InvalidGrid);
    g = square(5);
    g.vRange = {1.0, 1.0};
    EXPECT_THROW(g.validate(), InvalidGrid);
    g = square(5);
    g.basePoint = std::pair{7, 0};
    EXPECT_THROW(g.validate(), InvalidGrid);
}

TEST(IntegrateAxis, ZeroPotentialGivesIdentity) {
    const auto f = integrate_axis(AxisPotential(Axis::U, {}), linspace(0.0, 1.0, 11), kPolicy);
    ASSERT_EQ(f.size(), 11u);
    for (const auto& l : f) EXPECT_EQ(max_coeff_diff(l, LoopMatrix::identity()), 0.0);
}

TEST(IntegrateAxis, ConstantPotentialMatchesExponentialToFourthOrder) {
    const PotentialPair p = builtin("revolution");
    auto err = [&](int n) {
        const auto f = integrate_axis(p.etaPlus, linspace(0.0, 1.0, n), kPolicy);
        double e = 0.0;
        for (double lam : {0.5, 1.0, 1.5, -2.0}) {
            const Matrix2 exact = oracle::expm(1.0 * p.etaPlus.at(0.0).coeff(1) * lam +
                                               p.etaPlus.at(0.0).coeff(-1) * (1.0 / lam));
            e = std::max(e, dist(evaluate(f.back(), lam), exact));
        }
        return e;
    };
    const double e1 = err(11), e2 = err(21);
    EXPECT_LT(e1, 1e-3);
    EXPECT_GT(e1 / e2, 14.0);
    EXPECT_LT(e1 / e2, 18.0);
}

TEST(IntegrateAxis, NegativeSamplesAndFixedLambdaRoute) {
    const PotentialPair p = builtin("amsler");
    const auto s = linspace(-1.0, 1.0, 41);
    const auto f = integrate_axis(p.etaMinus, s, kPolicy);
    const auto fa = integrate_axis_at(p.etaMinus, s, 0.7);
    for (std::size_t k = 0; k < s.size(); ++k) {
        const Matrix2 exact = oracle::expm(s[k] * p.etaMinus.coefficient(-1, 0.0) * (1.0 / 0.7));
        EXPECT_LT(dist(evaluate(f[k], 0.7), exact), 1e-6);
        EXPECT_LT(dist(fa[k], exact), 1e-8);
        EXPECT_TRUE(is_twisted(f[k]));
    }
    EXPECT_LT(dist(evaluate(f[20], 0.7), Matrix2::identity()), 1e-15);
}

TEST(IntegrateAxis, TailOverflowWhenWindowTooSmall) {
    const PotentialPair p = builtin("revolution");
    EXPECT_THROW(integrate_axis(p.etaPlus, linspace(0.0, 4.0, 41), TruncationPolicy{2, 1e-10}), TailOverflow);
}

TEST(Birkhoff, IdentityAndPositiveLoops) {
    const BirkhoffFactors id = birkhoff_split(LoopMatrix::identity(), 8, kPolicy);
    EXPECT_LT(max_coeff_diff(id.hMinus, LoopMatrix::identity()), 1e-14);
    EXPECT_LT(max_coeff_diff(id.hPlus, LoopMatrix::identity()), 1e-14);

    std::mt19937 rng(3);
    const LoopMatrix phi = oracle::random_twisted(rng, 0, 3, 0.4, true);
    const BirkhoffFactors b = birkhoff_split(phi, 8, kPolicy);
    EXPECT_LT(max_coeff_diff(b.hMinus, LoopMatrix::identity()), 1e-12);
    EXPECT_LT(max_coeff_diff(b.hPlus, phi), 1e-12);
}

TEST(Birkhoff, RecoversKnownFactors) {
    // Phi = H- H+ with H- = I + negative powers, H+ = nonnegative powers, both polynomial
    std::mt19937 rng(4);
    for (int t = 0; t < 10; ++t) {
        // small perturbations of I keep both factors invertible on their discs
        LoopMatrix hm = oracle::random_twisted(rng, -3, -1, 0.1, false);
        hm.coeff_ref(0) = Matrix2::identity();
        const LoopMatrix hp = oracle::random_twisted(rng, 0, 3, 0.1, true);
        const LoopMatrix phi = mul(hm, hp, kWide);
        const BirkhoffFactors b = birkhoff_split(phi, kWide.maxDegree, kWide);
        EXPECT_LT(b.residual, 1e-10);
        EXPECT_LT(max_coeff_diff(mul(b.hMinus, b.hPlus, kWide), phi), 1e-10);
        EXPECT_LT(max_coeff_diff(b.hMinus, hm), 1e-9);
        EXPECT_LT(max_coeff_diff(b.hPlus, hp), 1e-9);
        EXPECT_TRUE(is_twisted(b.hMinus));
        EXPECT_TRUE(is_twisted(b.hPlus));
        EXPECT_LT(dist(b.hMinus.coeff(0), Matrix2::identity()), 1e-12);
        EXPECT_LE(b.hMinus.high_degree(), 0);
        EXPECT_GE(b.hPlus.low_degree(), 0);
    }
}

TEST(Birkhoff, RandomUnitaryLoops) {
    std::mt19937 rng(5);
    for (int t = 0; t < 10; ++t) {
        const LoopMatrix phi = truncate(loop_exp(oracle::random_twisted_su2(rng, -3, 3, 0.1), kWide), kWide);
        const BirkhoffFactors b = birkhoff_split(phi, kWide.maxDegree, kWide);
        EXPECT_LT(b.residual, 1e-10);
        EXPECT_LT(max_coeff_diff(mul(b.hMinus, b.hPlus, kWide), phi), 1e-10);
        EXPECT_TRUE(is_twisted(b.hMinus));
    }
}

TEST(Birkhoff, OffBigCellDetected) {
    LoopMatrix phi;
    phi.coeff_ref(2) = Matrix2{1.0, 0.0, 0.0, 0.0};
    phi.coeff_ref(-2) = Matrix2{0.0, 0.0, 0.0, 1.0};
    EXPECT_THROW(birkhoff_split(phi, 8, kPolicy), OffBigCell);
}

TEST(ExtendedFrame, ZeroPotentialsGiveIdentityFrame) {
    PotentialPair p;
    const ExtendedFrame f = extended_frame(p, square(5), kPolicy);
    for (const auto& l : f.values) EXPECT_LT(max_coeff_diff(l, LoopMatrix::identity()), 1e-15);
    EXPECT_TRUE(f.offBigCell.empty());
}

TEST(ExtendedFrame, BaseNormalizedTwistedUnitary) {
    for (const char* name : {"revolution", "amsler"}) {
        // loop RK4 runs at the grid step, so unitarity at 1e-8 needs a moderately fine grid
        const ExtendedFrame f = extended_frame(builtin(name), square(41, -0.5, 0.5), kPolicy);
        const auto [ib, jb] = f.grid.base_index();
        EXPECT_LT(max_coeff_diff(f.at(ib, jb), LoopMatrix::identity()), 1e-12);
        EXPECT_LT(f.max_residual(), 1e-10);
        for (const auto& l : f.values) EXPECT_TRUE(is_twisted(l));
        double worst = 0.0;
        for (double lam : kRealLambdas)
            for (const Matrix2& m : evaluate_frame(f, lam)) {
                worst = std::max(worst, (m * m.dagger() - Matrix2::identity()).max_abs());
                worst = std::max(worst, std::abs(m.det() - 1.0));
            }
        EXPECT_LT(worst, 1e-8) << name;
    }
}

TEST(ExtendedFrame, UAxisIsPositiveFrameTimesSplit) {
    // amsler: eta_plus has only a lambda^1 term, so F+ is a positive loop and F^(u, 0) = F+(u)
    const GridSpec g = square(11, 0.0, 1.0);
    {
        const PotentialPair p = builtin("amsler");
        const ExtendedFrame f = extended_frame(p, g, kPolicy);
        const auto fp = integrate_axis(p.etaPlus, g.u_samples(), kPolicy);
        for (int i = 0; i < g.nU; ++i) EXPECT_LT(max_coeff_diff(f.at(i, 0), fp[i]), 1e-10);
    }
    // revolution: F+ carries negative powers; F^(u, 0) = F+(u) H-(u) with H- the split of F+^-1
    {
        const PotentialPair p = builtin("revolution");
        const ExtendedFrame f = extended_frame(p, g, kPolicy);
        const auto fp = integrate_axis(p.etaPlus, g.u_samples(), kPolicy);
        for (int i = 0; i < g.nU; i += 5) {
            const BirkhoffFactors b = birkhoff_split(inverse(fp[i], kPolicy), kPolicy.maxDegree, kPolicy);
            EXPECT_LT(max_coeff_diff(f.at(i, 0), mul(fp[i], b.hMinus, kPolicy)), 1e-9);
        }
    }
}

TEST(ExtendedFrame, BirkhoffOrderIndependence) {
    const PotentialPair p = builtin("revolution");
    const GridSpec g = square(9);
    FrameOptions a, b;
    a.birkhoffOrder = 20;
    b.birkhoffOrder = 24;
    const ExtendedFrame fa = extended_frame(p, g, kPolicy, a);
    const ExtendedFrame fb = extended_frame(p, g, kPolicy, b);
    double d = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) d = std::max(d, max_coeff_diff(fa.values[k], fb.values[k]));
    EXPECT_LT(d, 1e-8);
}

TEST(ExtendedFrame, EvaluateFrameAgreesWithSummation) {
    // The fixed-lambda route integrates with fine substeps; summing the stored loops carries
    // the grid-step RK4 error. The two agree to fourth order in the grid step.
    auto gap = [](int n) {
        const ExtendedFrame f = extended_frame(builtin("revolution"), square(n, 0.0, 1.0), kPolicy);
        double d = 0.0;
        for (double lam : {1.0, 0.8, 1.25, -1.0}) {
            const auto v = evaluate_frame(f, lam);
            for (std::size_t k = 0; k < v.size(); ++k) d = std::max(d, dist(v[k], evaluate(f.values[k], lam)));
        }
        return d;
    };
    const double d1 = gap(11), d2 = gap(21);
    EXPECT_LT(d2, 1e-6);
    EXPECT_GT(d1 / d2, 12.0);
    const ExtendedFrame f = extended_frame(builtin("revolution"), square(5), kPolicy);
    EXPECT_THROW(evaluate_frame(f, 0.0), ZeroLambda);
}

TEST(ExtendedFrame, SmallLambdaUsesNegativeAxisFrame) {
    // F^ = F- H+^-1: at lambda -> 0 summing H- would need ever higher powers of 1/lambda,
    // the one-sided route stays unitary
    const ExtendedFrame f = extended_frame(builtin("revolution"), square(41, 0.0, 1.0), kPolicy);
    for (double lam : {0.1, 0.05, 20.0}) {
        for (const Matrix2& m : evaluate_frame(f, lam)) EXPECT_TRUE(is_su2(m, 1e-8)) << lam;
    }
}

TEST(MaurerCartan, ConstantFrameHasZeroForm) {
    ExtendedFrame f;
    f.grid = square(5);
    f.values.assign(f.grid.size(), LoopMatrix::constant(basis::e3));
    f.valid.assign(f.grid.size(), 1);
    f.residual.assign(f.grid.size(), 0.0);
    const MCData mc = maurer_cartan(f);
    for (std::size_t k = 0; k < f.grid.size(); ++k) {
        EXPECT_EQ(mc.b1[k].norm(), 0.0);
        EXPECT_EQ(mc.bm1[k].norm(), 0.0);
        EXPECT_EQ(mc.alpha0u[k].norm(), 0.0);
        EXPECT_EQ(mc.offPattern[k], 0.0);
    }
    EXPECT_FALSE(regular_at(mc)[12]);
}

TEST(MaurerCartan, BaseCoefficientsMatchPotential) {
    const PotentialPair p = builtin("revolution");
    auto err = [&](int n) {
        const ExtendedFrame f = extended_frame(p, square(n, -0.5, 0.5), kPolicy);
        const MCData mc = maurer_cartan(f);
        const auto [ib, jb] = f.grid.base_index();
        const std::size_t b = f.grid.index(ib, jb);
        EXPECT_TRUE(regular_at(mc)[b]);
        return std::max(dist(mc.b1[b], p.etaPlus.coefficient(1, 0.0)), dist(mc.bm1[b], p.etaMinus.coefficient(-1, 0.0)));
    };
    const double e1 = err(11), e2 = err(21);
    EXPECT_LT(e1, 1e-2);
    EXPECT_GT(e1 / e2, 3.5);
}

TEST(MaurerCartan, OffPatternEnergySmallAndSecondOrder) {
    const PotentialPair p = builtin("revolution");
    auto energy = [&](int n) { return maurer_cartan(extended_frame(p, square(n, 0.0, 1.0), kPolicy)).max_off_pattern(); };
    const double e1 = energy(21), e2 = energy(41);
    EXPECT_LT(e2, 1e-6);
    // energy is a sum of squares, so O(h^2) in norm means O(h^4) here
    EXPECT_GT(std::sqrt(e1 / e2), 3.5);
}

TEST(RegularAt, ParallelAndZeroVectors) {
    MCData mc;
    mc.b1 = {basis::e1, Matrix2{}, basis::e1};
    mc.bm1 = {2.5 * basis::e1, basis::e2, basis::e2};
    const auto r = regular_at(mc);
    EXPECT_FALSE(r[0]);
    EXPECT_FALSE(r[1]);
    EXPECT_TRUE(r[2]);
}

TEST(AssociatedFrame, ScaleOneAndEvaluationOracle) {
    const ExtendedFrame f = extended_frame(builtin("amsler"), square(7), kPolicy);
    const ExtendedFrame same = associated_frame(f, 1.0);
    for (std::size_t k = 0; k < f.values.size(); ++k) EXPECT_EQ(max_coeff_diff(same.values[k], f.values[k]), 0.0);

    const ExtendedFrame a = associated_frame(f, 1.5);
    for (std::size_t k = 0; k < f.values.size(); ++k)
        for (double lam : {0.9, 1.0, 1.2})
            EXPECT_LT(dist(evaluate(a.values[k], lam), evaluate(f.values[k], 1.5 * lam)), 1e-10);
    const auto va = evaluate_frame(a, 1.0);
    const auto vf = evaluate_frame(f, 1.5);
    for (std::size_t k = 0; k < va.size(); ++k) EXPECT_LT(dist(va[k], vf[k]), 1e-9);
}

// The diagonal part of the Maurer-Cartan form is not gauge invariant. In our gauge it is
// tied to the rotation of B_-1 along u and of B_1 along v: U0 = -(1/2) d_u arg B_-1 e3 and
// V0 = -(1/2) d_v arg B_1 e3 up to O(h^2), arg taken in the (e1, e2) plane.
TEST(MaurerCartan, DiagonalPartFollowsRotationOfOffDiagonalTerms) {
    for (const char* name : {"revolution", "amsler"}) {
        auto defect = [&](int n) {
            const ExtendedFrame f = extended_frame(builtin(name), square(n), kPolicy);
            const MCData mc = maurer_cartan(f);
            const GridSpec& g = f.grid;
            auto arg = [](const Matrix2& m) {
                const Vec3 x = su2_coords(m);
                return std::atan2(x[1], x[0]);
            };
            auto wrap = [](double d) { return std::remainder(d, 2.0 * M_PI); };
            std::vector<double> du, dv;
            for (int i = 2; i < g.nU - 2; ++i)
                for (int j = 2; j < g.nV - 2; ++j) {
                    const std::size_t k = g.index(i, j);
                    const double au = wrap(arg(mc.bm1[g.index(i + 1, j)]) - arg(mc.bm1[g.index(i - 1, j)])) / (2 * g.hu());
                    const double av = wrap(arg(mc.b1[g.index(i, j + 1)]) - arg(mc.b1[g.index(i, j - 1)])) / (2 * g.hv());
                    du.push_back(std::abs(su2_coords(mc.alpha0u[k])[2] + 0.5 * au));
                    dv.push_back(std::abs(su2_coords(mc.alpha0v[k])[2] + 0.5 * av));
                }
            return std::make_pair(oracle::median(du), oracle::median(dv));
        };
        const auto [u1, v1] = defect(21);
        const auto [u2, v2] = defect(41);
        EXPECT_LT(u2, 2e-3) << name;
        EXPECT_LT(v2, 2e-3) << name;
        EXPECT_GT(u1 / u2, 3.5) << name;
        if (v1 > 1e-12) EXPECT_GT(v1 / v2, 3.5) << name;
    }
}
