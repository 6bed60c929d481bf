#include <gtest/gtest.h>

#include <random>

#include "affine_pr/constructions.hpp"
#include "affine_pr/recovery.hpp"

using namespace affine_pr;

TEST(BlockRecover, RealByHand) {
    const BlockSolution s = block_recover({{0.0}, {1.0}}, RVec{1, 4}, FieldTag::Real);
    EXPECT_NEAR(s.z[0].real(), 1.0, 1e-14);
    EXPECT_NEAR(s.s, 1.0, 1e-14);
    EXPECT_NEAR(s.residual, 0.0, 1e-14);
    EXPECT_TRUE(s.consistent);
}

TEST(BlockRecover, ComplexByHand) {
    const BlockSolution s =
        block_recover(default_spanning_offsets(1, FieldTag::Complex), RVec{10, 8, 5}, FieldTag::Complex);
    EXPECT_NEAR(s.z[0].real(), 1.0, 1e-14);
    EXPECT_NEAR(s.z[0].imag(), 2.0, 1e-14);
    EXPECT_NEAR(s.s, 5.0, 1e-14);
}

TEST(BlockRecover, NonSpanningOffsetsAreSingular) {
    try {
        block_recover({{0.0}, {0.0}}, RVec{1, 1}, FieldTag::Real);
        FAIL();
    } catch (const SingularSystemError& e) {
        EXPECT_EQ(e.rank(), 1u);
        EXPECT_EQ(e.size(), 2u);
    }
}

TEST(BlockRecover, InjectedErrorIsFlagged) {
    const auto offs = default_spanning_offsets(3, FieldTag::Real);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        const Signal x = random_signal(3, FieldTag::Real, rng);
        RVec y;
        for (const auto& o : offs) {
            double s = 0;
            for (std::size_t i = 0; i < 3; ++i) s += std::norm(x.entries[i] + o[i]);
            y.push_back(s);
        }
        EXPECT_LE(block_recover(offs, y, FieldTag::Real).residual, 1e-10 * (1 + norm(x) * norm(x)));
        y[0] += 1.0;
        const BlockSolution bad = block_recover(offs, y, FieldTag::Real);
        EXPECT_GT(bad.residual, 1e-3);
        EXPECT_FALSE(bad.consistent);
    }
}

TEST(TightRecover, Examples) {
    const TightRecovery r = tight_recover(tight_ensemble(2, 1, FieldTag::Real), RVec{1, 4, 4, 9});
    EXPECT_NEAR(r.x.entries[0].real(), 1.0, 1e-14);
    EXPECT_NEAR(r.x.entries[1].real(), 2.0, 1e-14);
    const TightRecovery c = tight_recover(tight_ensemble(1, 1, FieldTag::Complex), RVec{10, 8, 5});
    EXPECT_NEAR(std::abs(c.x.entries[0] - cdouble(1, 2)), 0.0, 1e-14);
    const Ensemble e = tight_ensemble(5, 2, FieldTag::Complex);
    const TightRecovery z = tight_recover(e, measure(e, Signal::complex(CVec(5))));
    EXPECT_LT(norm(z.x), 1e-14);
}

TEST(TightRecover, RoundTripGrid) {
    for (FieldTag f : {FieldTag::Real, FieldTag::Complex})
        for (std::size_t d = 1; d <= 12; ++d)
            for (std::size_t r = 1; r <= d; ++r) {
                const Ensemble e = tight_ensemble(d, r, f);
                std::mt19937_64 rng(mix_seed(99, d, r));
                for (int t = 0; t < 10; ++t) {
                    const Signal x = random_signal(d, f, rng);
                    const TightRecovery rec = tight_recover(e, measure(e, x));
                    ASSERT_LE(norm(rec.x - x), 1e-8 * (1 + norm(x))) << "d=" << d << " r=" << r;
                    EXPECT_TRUE(rec.consistent());
                }
            }
}

TEST(TightRecover, Preconditions) {
    Ensemble e = random_ensemble(2, 1, 4, FieldTag::Real, 1);
    EXPECT_THROW(tight_recover(e, RVec(4)), PreconditionError);
    EXPECT_THROW(tight_recover(tight_ensemble(2, 1, FieldTag::Real), RVec(3)), DimensionError);
}

TEST(TightRecover, SingularBlockNamesIndex) {
    Ensemble e = tight_ensemble(2, 1, FieldTag::Real);
    e.meta->blocks[1].offsets = {{0.0}, {0.0}};
    try {
        tight_recover(e, RVec{1, 4, 4, 9});
        FAIL();
    } catch (const SingularSystemError& err) {
        EXPECT_NE(std::string(err.what()).find("block 2"), std::string::npos);
    }
}

TEST(LsqRecover, PlantedRealSignal) {
    const Ensemble e = random_ensemble(3, 2, 8, FieldTag::Real, 42);
    const Signal x = Signal::real({0.7, -1.3, 0.2});
    LsqOptions opts;
    opts.seed = 5;
    const RecoveryReport rep = lsq_recover(e, measure(e, x), opts);
    EXPECT_TRUE(rep.success);
    EXPECT_LE(norm(rep.x - x), 1e-6);
    EXPECT_EQ(rep.restarts_used, 20);
}

TEST(LsqRecover, CorruptedDataFails) {
    const Ensemble e = random_ensemble(3, 2, 8, FieldTag::Real, 42);
    RVec y = measure(e, Signal::real({0.7, -1.3, 0.2}));
    y[0] = -50;  // no signal has a negative squared norm
    EXPECT_FALSE(lsq_recover(e, y).success);
}

TEST(LsqRecover, AgreesWithTightRecovery) {
    for (FieldTag f : {FieldTag::Real, FieldTag::Complex}) {
        const Ensemble e = tight_ensemble(3, 1, f);
        std::mt19937_64 rng(6);
        const Signal x = random_signal(3, f, rng);
        const RVec y = measure(e, x);
        const RecoveryReport rep = lsq_recover(e, y);
        EXPECT_TRUE(rep.success);
        EXPECT_LE(norm(rep.x - tight_recover(e, y).x), 1e-6);
    }
}

TEST(LsqRecover, PlantedSuccessRateSmallDimensions) {
    int failures = 0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t d = 2 + t % 3;
        const FieldTag f = t % 2 ? FieldTag::Complex : FieldTag::Real;
        const std::size_t m = f == FieldTag::Real ? 2 * d + 2 : 4 * d + 1;
        const Ensemble e = random_ensemble(d, 1, m, f, mix_seed(3, t));
        Rng rng(mix_seed(4, t));
        const Signal x = random_signal(d, f, rng);
        LsqOptions opts;
        opts.seed = static_cast<std::uint64_t>(t);
        const RecoveryReport rep = lsq_recover(e, measure(e, x), opts);
        if (!rep.success || norm(rep.x - x) > 1e-6 * (1 + norm(x))) ++failures;
    }
    EXPECT_EQ(failures, 0);
}

TEST(LsqRecover, DeterministicPerSeed) {
    const Ensemble e = random_ensemble(2, 1, 5, FieldTag::Complex, 8);
    const RVec y = measure(e, Signal::complex({{1, 1}, {-0.5, 2}}));
    LsqOptions opts;
    opts.seed = 77;
    opts.restarts = 4;
    const RecoveryReport a = lsq_recover(e, y, opts), b = lsq_recover(e, y, opts);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.best_restart, b.best_restart);
}
