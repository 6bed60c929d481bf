#include <gtest/gtest.h>

#include "affine_pr/constructions.hpp"
#include "affine_pr/forward_map.hpp"

using namespace affine_pr;

namespace {

Ensemble deficient_real() {
    Ensemble e;
    e.field = FieldTag::Real;
    e.d = 2;
    e.r = 1;
    auto add = [&](std::size_t row, double b) {
        MeasurementPair p{CMatrix(2, 1), CVec(1)};
        p.M(row, 0) = 1;
        p.b[0] = b;
        e.pairs.push_back(p);
    };
    add(0, 0);
    add(0, 1);
    add(1, 0);
    return e;
}

MeasurementPair unit_pair_2d() {
    MeasurementPair p{CMatrix(2, 1), CVec(1)};
    p.M(0, 0) = 1;
    p.b[0] = 1;
    return p;
}

}  // namespace

TEST(Measure, TightRealOracle) {
    const Ensemble e = tight_ensemble(2, 1, FieldTag::Real);
    EXPECT_EQ(measure(e, Signal::real({1, 2})), (RVec{1, 4, 4, 9}));
}

TEST(Measure, ZeroEnsemble) {
    Ensemble e;
    e.d = 3;
    e.r = 2;
    e.pairs.assign(4, MeasurementPair{CMatrix(3, 2), CVec(2)});
    EXPECT_EQ(measure(e, Signal::real({1, -2, 7})), RVec(4, 0.0));
}

TEST(Measure, TightComplexOracle) {
    const Ensemble e = tight_ensemble(1, 1, FieldTag::Complex);
    const RVec y = measure(e, Signal::complex({{1, 2}}));
    EXPECT_DOUBLE_EQ(y[0], 10.0);
    EXPECT_DOUBLE_EQ(y[1], 8.0);
    EXPECT_DOUBLE_EQ(y[2], 5.0);
}

TEST(Measure, DimensionMismatchThrows) {
    const Ensemble e = tight_ensemble(2, 1, FieldTag::Real);
    EXPECT_THROW(measure(e, Signal::real({1, 2, 3})), DimensionError);
}

TEST(Measure, AppendingZeroPairAddsZero) {
    Ensemble e = tight_ensemble(3, 2, FieldTag::Complex);
    const Signal x = Signal::complex({{1, -1}, {0.5, 2}, {-3, 0}});
    const RVec y = measure(e, x);
    e.meta.reset();
    e.pairs.push_back({CMatrix(3, 2), CVec(2)});
    RVec want = y;
    want.push_back(0.0);
    EXPECT_EQ(measure(e, x), want);
}

TEST(Polarization, RealOracle) {
    EXPECT_DOUBLE_EQ(polarization_gap(unit_pair_2d(), Signal::real({1, 2}), Signal::real({3, 0})), -12.0);
}

TEST(Polarization, EqualSignalsGiveExactZero) {
    const Signal x = Signal::real({0.3, -7});
    EXPECT_EQ(polarization_gap(unit_pair_2d(), x, x), 0.0);
}

TEST(Polarization, ComplexOracle) {
    MeasurementPair p{CMatrix(1, 1), CVec(1)};
    p.M(0, 0) = 1;
    p.b[0] = {0, 1};
    EXPECT_NEAR(polarization_gap(p, Signal::complex({{1, 2}}), Signal::complex({{0, 0}})), 9.0, 1e-14);
}

TEST(Jacobian, TightRealOracle) {
    const Ensemble e = tight_ensemble(2, 1, FieldTag::Real);
    const RMatrix j = jacobian(e, Signal::real({1, 2}));
    const double want[2][4] = {{2, 4, 0, 0}, {0, 0, 4, 6}};
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(j(i, k), want[i][k]);
}

TEST(Jacobian, ZeroAtCommonRoot) {
    // Every affine image vanishes at x = (-1, 0): the gradient of each squared norm is zero.
    Ensemble e;
    e.d = 2;
    e.r = 1;
    for (double s : {1.0, 2.0, -3.0}) {
        MeasurementPair p{CMatrix(2, 1), CVec(1)};
        p.M(0, 0) = s;
        p.M(1, 0) = s * s;
        p.b[0] = s;
        e.pairs.push_back(p);
    }
    const RMatrix j = jacobian(e, Signal::real({-1, 0}));
    EXPECT_EQ(j, RMatrix(2, 3));
}

TEST(Jacobian, ComplexTightHasFullRank) {
    const Ensemble e = tight_ensemble(1, 1, FieldTag::Complex);
    const Signal x = Signal::complex({{1, 2}});
    const RMatrix j = jacobian(e, x);
    ASSERT_EQ(j.rows(), 2u);
    ASSERT_EQ(j.cols(), 3u);
    EXPECT_EQ(numerical_rank(j), 2u);
    // Central differences as an independent oracle.
    const double h = 1e-6;
    for (std::size_t i = 0; i < 2; ++i) {
        RVec up = x.real_params(), dn = x.real_params();
        up[i] += h;
        dn[i] -= h;
        const RVec yu = measure(e, Signal::from_real_params(FieldTag::Complex, up));
        const RVec yd = measure(e, Signal::from_real_params(FieldTag::Complex, dn));
        for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(j(i, k), (yu[k] - yd[k]) / (2 * h), 1e-6);
    }
}

TEST(Margin, TightRealAtPoint) {
    const Ensemble e = tight_ensemble(2, 1, FieldTag::Real);
    const MarginResult mr = margin(e, Signal::real({1, 2}));
    EXPECT_NEAR(mr.value, 5.0, 1e-12);
    EXPECT_NEAR(mr.largest, 13.0, 1e-12);
    EXPECT_NEAR(std::abs(mr.direction[0]), 1.0, 1e-12);
    EXPECT_NEAR(mr.direction[1], 0.0, 1e-12);
}

TEST(Margin, TightRealAtOriginIsOne) {
    const MarginResult mr = margin(tight_ensemble(2, 1, FieldTag::Real), Signal::real({0, 0}));
    EXPECT_GE(mr.value, 1.0 - 1e-9);
}

TEST(Margin, DeficientAtOriginIsZero) {
    const MarginResult mr = margin(deficient_real(), Signal::real({0, 0}));
    EXPECT_EQ(mr.value, 0.0);
    EXPECT_TRUE(mr.rank_deficient());
    EXPECT_NEAR(std::abs(mr.direction[1]), 1.0, 1e-12);
}

TEST(Margin, DegenerateBlockGivesZero) {
    // Two independent blocks; the second sees the same offset twice, so at u2 = -offset
    // both of its Jacobian columns vanish.
    Ensemble e;
    e.d = 2;
    e.r = 1;
    for (std::size_t row : {0u, 1u})
        for (double b : {0.0, row == 0 ? 1.0 : 0.0}) {
            MeasurementPair p{CMatrix(2, 1), CVec(1)};
            p.M(row, 0) = 1;
            p.b[0] = b;
            e.pairs.push_back(p);
        }
    const MarginResult mr = margin(e, Signal::real({0.7, 0.0}));
    EXPECT_LE(mr.value, mr.rank_threshold());
}

TEST(Margin, RayleighConsistency) {
    const Ensemble e = random_ensemble(3, 2, 6, FieldTag::Complex, 17);
    const ForwardModel model(e);
    const RVec u{0.1, -0.2, 0.3, 0.5, 1.0, -1.5};
    const MarginResult mr = margin(model, u);
    EXPECT_NEAR(norm2(mr.direction), 1.0, 1e-12);
    const RMatrix g = model.gram(u);
    EXPECT_NEAR(dot(mr.direction, g * mr.direction), mr.value, 1e-9);
}

TEST(WitnessScale, UsesImageNorms) {
    const Ensemble e = tight_ensemble(2, 1, FieldTag::Real);
    // Largest image norm over both signals is |3 + 1| = 4.
    EXPECT_DOUBLE_EQ(witness_scale(e, Signal::real({1, 2}), Signal::real({0, 3})), 5.0);
    EXPECT_DOUBLE_EQ(measurement_scale(RVec{1, -7, 3}), 8.0);
}
