#include <gtest/gtest.h>

#include "affine_pr/constructions.hpp"
#include "affine_pr/forward_map.hpp"
#include "affine_pr/serialization.hpp"

using namespace affine_pr;

namespace {

struct Case {
    Ensemble e;
    Signal x, y;
};

Case random_case(std::uint64_t k) {
    Rng rng(mix_seed(777, k));
    const std::size_t d = 1 + rng() % 5;
    const std::size_t r = 1 + rng() % d;
    const std::size_t m = 1 + rng() % 6;
    const FieldTag f = rng() % 2 ? FieldTag::Complex : FieldTag::Real;
    Case c{random_ensemble(d, r, m, f, rng()), {}, {}};
    c.x = random_signal(d, f, rng);
    c.y = random_signal(d, f, rng, 2.0);
    return c;
}

double pair_size(const MeasurementPair& p) {
    const double mn = frobenius_norm(p.M), bn = norm2(p.b);
    return 1 + mn * mn + bn * bn;
}

}  // namespace

TEST(Property, PolarizationIdentity) {
    for (std::uint64_t k = 0; k < 1000; ++k) {
        const Case c = random_case(k);
        for (const auto& p : c.e.pairs) {
            const double direct = measure_pair(p, c.x) - measure_pair(p, c.y);
            const double tol = 1e-10 * (1 + norm(c.x) * norm(c.x) + norm(c.y) * norm(c.y)) * pair_size(p);
            ASSERT_NEAR(polarization_gap(p, c.x, c.y), direct, tol) << "case " << k;
        }
    }
}

TEST(Property, LiftAndRealifyAgreeWithMeasurement) {
    for (std::uint64_t k = 0; k < 1000; ++k) {
        const Case c = random_case(k);
        const CVec xt = augment(c.x);
        const RVec u = c.x.real_params();
        const double nx = norm(c.x);
        for (const auto& p : c.e.pairs) {
            const double y = measure_pair(p, c.x);
            const double tol = 1e-10 * (1 + nx * nx) * pair_size(p);
            const CMatrix a = lift_measurement(p).A;
            const cdouble lifted = cdot(xt, a * xt);
            ASSERT_NEAR(lifted.real(), y, tol) << "case " << k;
            ASSERT_NEAR(lifted.imag(), 0.0, tol);
            ASSERT_NEAR(quadratic_form(p, c.e.field).evaluate(u), y, tol);
            const RealAffineMap am = realified_affine_map(p, c.e.field);
            RVec img = am.L * u;
            for (std::size_t i = 0; i < img.size(); ++i) img[i] += am.beta[i];
            const double n = norm2(img);
            ASSERT_NEAR(n * n, y, tol);
        }
    }
}

TEST(Property, LiftedMatrixIsHermitian) {
    for (std::uint64_t k = 0; k < 300; ++k) {
        const Case c = random_case(k);
        for (const auto& p : c.e.pairs) {
            const CMatrix a = lift_measurement(p).A;
            ASSERT_LE(frobenius_norm(a - a.adjoint()), 1e-12 * (1 + frobenius_norm(a)));
        }
    }
}

TEST(Property, JacobianMatchesCentralDifferences) {
    const double h = 1e-6;
    for (std::uint64_t k = 0; k < 200; ++k) {
        const Case c = random_case(k);
        const RMatrix jac = jacobian(c.e, c.x);
        const RVec u = c.x.real_params();
        const double scale = 1 + max_abs(jac);
        for (std::size_t i = 0; i < u.size(); ++i) {
            RVec up = u, dn = u;
            up[i] += h;
            dn[i] -= h;
            const RVec yp = measure(c.e, Signal::from_real_params(c.e.field, up));
            const RVec yd = measure(c.e, Signal::from_real_params(c.e.field, dn));
            for (std::size_t j = 0; j < yp.size(); ++j)
                ASSERT_NEAR((yp[j] - yd[j]) / (2 * h), jac(i, j), 1e-5 * scale) << "case " << k;
        }
    }
}

TEST(Property, GramIsQuarterJJt) {
    for (std::uint64_t k = 0; k < 300; ++k) {
        const Case c = random_case(k);
        const ForwardModel model(c.e);
        const RVec u = c.x.real_params();
        const RMatrix jac = model.jacobian(u);
        const RMatrix g = model.gram(u);
        RMatrix want = jac * jac.adjoint();
        for (auto& v : want.data()) v *= 0.25;
        ASSERT_LE(frobenius_norm(g - want), 1e-9 * (1 + frobenius_norm(g)));
        const MarginResult mr = margin_from_gram(g);
        EXPECT_GE(mr.value, 0.0);
        EXPECT_LE(mr.value, mr.largest * (1 + 1e-12) + 1e-300);
    }
}

TEST(Property, SerializationRoundTrip) {
    for (std::uint64_t k = 0; k < 300; ++k) {
        const Case c = random_case(k);
        const Ensemble back = parse_ensemble(serialize_ensemble(c.e));
        ASSERT_EQ(back.m(), c.e.m());
        for (std::size_t j = 0; j < back.m(); ++j) {
            const auto& p = c.e.pairs[j];
            const auto& q = back.pairs[j];
            ASSERT_LE(frobenius_norm(p.M - q.M), 1e-15 * frobenius_norm(p.M));
            for (std::size_t i = 0; i < p.b.size(); ++i) ASSERT_LE(std::abs(p.b[i] - q.b[i]), 1e-15 * norm2(p.b));
        }
        const Signal xs = signal_from_json(json::parse(dump_json(signal_json(c.x))));
        ASSERT_LE(norm(xs - c.x), 1e-15 * norm(c.x));
    }
}

TEST(Property, MeasurementsAreNonNegative) {
    for (std::uint64_t k = 0; k < 300; ++k) {
        const Case c = random_case(k);
        for (double v : measure(c.e, c.x)) ASSERT_GE(v, 0.0);
    }
}
