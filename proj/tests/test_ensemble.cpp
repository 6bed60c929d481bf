#include <gtest/gtest.h>

#include <random>

#include "affine_pr/constructions.hpp"
#include "affine_pr/ensemble.hpp"
#include "affine_pr/forward_map.hpp"

using namespace affine_pr;

namespace {

MeasurementPair pair_of(std::size_t d, std::size_t r) { return {CMatrix(d, r), CVec(r)}; }

MeasurementPair random_pair(std::size_t d, std::size_t r, FieldTag f, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    MeasurementPair p = pair_of(d, r);
    for (auto& v : p.M.data()) v = {g(rng), f == FieldTag::Complex ? g(rng) : 0.0};
    for (auto& v : p.b) v = {g(rng), f == FieldTag::Complex ? g(rng) : 0.0};
    return p;
}

}  // namespace

TEST(Validate, TightRealIsValid) {
    const Ensemble e = tight_ensemble(2, 1, FieldTag::Real);
    const ValidationReport rep = validate_ensemble(e);
    EXPECT_TRUE(rep.valid());
    EXPECT_EQ(rep.m, 4u);
}

TEST(Validate, WrongRowCountIsNamed) {
    Ensemble e = tight_ensemble(2, 1, FieldTag::Real);
    e.meta.reset();
    e.pairs[1] = pair_of(3, 1);
    const ValidationReport rep = validate_ensemble(e);
    ASSERT_FALSE(rep.valid());
    EXPECT_EQ(rep.problems.front(), "pair 2 has d=3, ensemble d=2");
}

TEST(Validate, EmptyPairList) {
    Ensemble e;
    e.d = 2;
    e.r = 1;
    const ValidationReport rep = validate_ensemble(e);
    ASSERT_FALSE(rep.valid());
    EXPECT_EQ(rep.problems.front(), "m must be >= 1");
}

TEST(Validate, ReportsEveryProblem) {
    Ensemble e;
    e.d = 2;
    e.r = 1;
    e.pairs = {pair_of(3, 1), pair_of(2, 2)};
    e.pairs.push_back(pair_of(2, 1));
    e.pairs.back().b[0] = std::nan("");
    const ValidationReport rep = validate_ensemble(e);
    EXPECT_GE(rep.problems.size(), 3u);
}

TEST(Validate, ImaginaryPartInRealEnsemble) {
    Ensemble e = tight_ensemble(1, 1, FieldTag::Real);
    e.pairs[0].b[0] = {0.0, 1e-300};
    EXPECT_FALSE(validate_ensemble(e).valid());
}

TEST(Validate, TamperedTightLayoutIsCaught) {
    Ensemble e = tight_ensemble(4, 2, FieldTag::Real);
    e.pairs[2].b[0] += 0.5;
    const ValidationReport rep = validate_ensemble(e);
    ASSERT_FALSE(rep.valid());
    EXPECT_EQ(rep.problems.front(), "pair 3 does not match its tight block layout");

    Ensemble f = tight_ensemble(4, 2, FieldTag::Real);
    f.meta->epsilon_dr = 1;
    EXPECT_FALSE(validate_ensemble(f).valid());
}

TEST(Lift, RealUnitColumn) {
    MeasurementPair p = pair_of(2, 1);
    p.M(0, 0) = 1;
    p.b[0] = 1;
    const CMatrix a = lift_measurement(p).A;
    const double want[3][3] = {{1, 0, 1}, {0, 0, 0}, {1, 0, 1}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_EQ(a(i, j), cdouble(want[i][j]));
}

TEST(Lift, ZeroPairGivesZeroMatrix) {
    const CMatrix a = lift_measurement(pair_of(3, 2)).A;
    EXPECT_EQ(a, CMatrix(4, 4));
}

TEST(Lift, ComplexScalar) {
    MeasurementPair p = pair_of(1, 1);
    p.M(0, 0) = 1;
    p.b[0] = {0, 1};
    const CMatrix a = lift_measurement(p).A;
    EXPECT_EQ(a(0, 0), cdouble(1));
    EXPECT_EQ(a(0, 1), cdouble(0, 1));
    EXPECT_EQ(a(1, 0), cdouble(0, -1));
    EXPECT_EQ(a(1, 1), cdouble(1));
    const CVec xt = augment(Signal::complex({{1, 2}}));
    const cdouble q = cdot(xt, a * xt);
    EXPECT_NEAR(q.real(), 10.0, 1e-14);
    EXPECT_NEAR(q.imag(), 0.0, 1e-14);
}

TEST(Realify, ComplexScalar) {
    MeasurementPair p = pair_of(1, 1);
    p.M(0, 0) = 1;
    p.b[0] = {0, 1};
    const RealifiedPair rp = realify_pair(p);
    EXPECT_EQ(rp.F, RMatrix::identity(2));
    EXPECT_EQ(rp.c, (RVec{0, 1}));
    EXPECT_EQ(rp.const_term, 1.0);
    EXPECT_DOUBLE_EQ(rp.evaluate(RVec{1, 2}), 10.0);
}

TEST(Realify, ZeroPair) {
    const RealifiedPair rp = realify_pair(pair_of(2, 1));
    EXPECT_EQ(rp.F, RMatrix(4, 4));
    EXPECT_EQ(rp.c, RVec(4, 0.0));
    EXPECT_EQ(rp.const_term, 0.0);
}

TEST(Realify, BlockStructureAndNonnegativity) {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 1 + trial % 4;
        const MeasurementPair p = random_pair(d, 1 + trial % 3, FieldTag::Complex, rng);
        const RealifiedPair rp = realify_pair(p);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                EXPECT_NEAR(rp.F(i, j), rp.F(i + d, j + d), 1e-12);
                EXPECT_NEAR(rp.F(i, j), rp.F(j, i), 1e-12);       // B symmetric
                EXPECT_NEAR(rp.F(i + d, j), -rp.F(j + d, i), 1e-12);  // C antisymmetric
                EXPECT_NEAR(rp.F(i, j + d), -rp.F(i + d, j), 1e-12);
            }
        for (int k = 0; k < 100; ++k) {
            RVec u(2 * d);
            for (auto& v : u) v = g(rng);
            EXPECT_GE(rp.evaluate(u), -1e-9);
        }
    }
}

TEST(Realify, RealPairEmbedsWithZeroC) {
    std::mt19937_64 rng(4);
    const MeasurementPair p = random_pair(3, 2, FieldTag::Real, rng);
    const RealifiedPair rp = realify_pair(p);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(rp.F(i + 3, j), 0.0);
}

TEST(AffineMap, RealifiedMatchesComplexImage) {
    std::mt19937_64 rng(8);
    const MeasurementPair p = random_pair(3, 2, FieldTag::Complex, rng);
    const RealAffineMap mp = realified_affine_map(p, FieldTag::Complex);
    const Signal x = Signal::complex({{0.5, -1}, {2, 0.25}, {-1, 1}});
    const CVec z = affine_image(p, x);
    const RVec u = x.real_params();
    RVec lz = mp.L * u;
    for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_NEAR(lz[k] + mp.beta[k], z[k].real(), 1e-12);
        EXPECT_NEAR(lz[k + 2] + mp.beta[k + 2], z[k].imag(), 1e-12);
    }
}

TEST(Signal, RealParamsRoundTrip) {
    const Signal x = Signal::complex({{1, 2}, {3, -4}});
    EXPECT_EQ(x.real_params(), (RVec{1, 3, 2, -4}));
    EXPECT_EQ(Signal::from_real_params(FieldTag::Complex, x.real_params()), x);
}

TEST(Counts, MinimalAndTight) {
    EXPECT_EQ(minimal_count(FieldTag::Real, 4, 2), 6u);
    EXPECT_EQ(minimal_count(FieldTag::Complex, 1, 1), 3u);
    EXPECT_EQ(tight_count(FieldTag::Real, 5, 2), 8u);
    EXPECT_EQ(tight_count(FieldTag::Complex, 5, 2), 13u);
}

TEST(CheckSignal, RejectsMismatches) {
    const Ensemble e = tight_ensemble(2, 1, FieldTag::Real);
    EXPECT_THROW(check_signal(e, Signal::real({1})), DimensionError);
    EXPECT_THROW(check_signal(e, Signal::complex({{1, 0}, {0, 0}})), DimensionError);
}
