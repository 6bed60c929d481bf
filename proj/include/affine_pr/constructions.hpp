#pragma once

// Tight ensembles reaching the minimal measurement count, their spanning
// offsets, perturbed non-injective neighbours, and Gaussian random ensembles.

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "affine_pr/ensemble.hpp"
#include "affine_pr/errors.hpp"
#include "affine_pr/forward_map.hpp"
#include "affine_pr/rng.hpp"

namespace affine_pr {

/// Real: 0, e_1, ..., e_r. Complex: i e_1, ..., i e_r, e_1, ..., e_r, 0.
inline std::vector<CVec> default_spanning_offsets(std::size_t r, FieldTag field) {
    if (r < 1) throw PreconditionError("offsets need r >= 1");
    std::vector<CVec> out;
    auto unit = [r](std::size_t k, cdouble v) {
        CVec e(r);
        e[k] = v;
        return e;
    };
    if (field == FieldTag::Real) {
        out.push_back(CVec(r));
        for (std::size_t k = 0; k < r; ++k) out.push_back(unit(k, 1.0));
    } else {
        for (std::size_t k = 0; k < r; ++k) out.push_back(unit(k, cdouble{0.0, 1.0}));
        for (std::size_t k = 0; k < r; ++k) out.push_back(unit(k, 1.0));
        out.push_back(CVec(r));
    }
    return out;
}

/// Rows [2 Re b'_k, (2 Im b'_k), 1]; solving against y_k - ||b'_k||^2 yields (x, ||x||^2).
inline RMatrix block_recovery_matrix(const std::vector<CVec>& offsets, FieldTag field) {
    if (offsets.empty()) throw PreconditionError("no offsets given");
    const std::size_t r = offsets.front().size();
    const std::size_t cols = real_dim(field, r) + 1;
    RMatrix a(offsets.size(), cols);
    for (std::size_t k = 0; k < offsets.size(); ++k) {
        if (offsets[k].size() != r) throw DimensionError("offsets have differing lengths");
        for (std::size_t i = 0; i < r; ++i) {
            a(k, i) = 2.0 * offsets[k][i].real();
            if (field == FieldTag::Complex) a(k, i + r) = 2.0 * offsets[k][i].imag();
        }
        a(k, cols - 1) = 1.0;
    }
    return a;
}

/// True when the offsets determine a block uniquely: the affine differences span R^r
/// (or C^r over R), equivalently the square recovery matrix is nonsingular.
inline bool offsets_span(const std::vector<CVec>& offsets, FieldTag field, std::size_t* rank_out = nullptr) {
    if (offsets.empty()) return false;
    const std::size_t r = offsets.front().size();
    const std::size_t need = real_dim(field, r) + 1;
    if (field == FieldTag::Real)
        for (const auto& b : offsets)
            for (const auto& v : b)
                if (v.imag() != 0.0) return false;
    const RMatrix a = block_recovery_matrix(offsets, field);
    const std::size_t rank = numerical_rank(a);
    if (rank_out) *rank_out = rank;
    return offsets.size() == need && rank == need;
}

namespace detail {

inline void append_block(Ensemble& e, ConstructionMeta& meta, std::size_t start, std::size_t size,
                         const std::vector<CVec>& offsets) {
    BlockLayout blk;
    blk.start = start;
    blk.size = size;
    blk.first_pair = e.pairs.size();
    blk.pair_count = offsets.size();
    blk.offsets = offsets;
    for (const CVec& off : offsets) {
        MeasurementPair p{CMatrix(e.d, e.r), CVec(e.r)};
        for (std::size_t i = 0; i < size; ++i) p.M(start + i, i) = 1.0;
        for (std::size_t i = 0; i < size; ++i) p.b[i] = off[i];
        e.pairs.push_back(std::move(p));
    }
    meta.blocks.push_back(std::move(blk));
}

}  // namespace detail

/// Block construction with (M_j)_{T_t} = I_r and offsets cycling through a spanning family.
/// When r does not divide d, the leftover block of size r' uses rows [I_{r'} | 0] and the
/// default r'-dimensional offsets zero-padded to length r.
inline Ensemble tight_ensemble(std::size_t d, std::size_t r, FieldTag field,
                               const std::optional<std::vector<CVec>>& offsets = std::nullopt) {
    if (d < 1 || r < 1) throw PreconditionError("tight ensemble needs d >= 1 and r >= 1");
    std::vector<CVec> block_offsets = offsets ? *offsets : default_spanning_offsets(r, field);
    if (offsets) {
        if (block_offsets.empty() || block_offsets.front().size() != r)
            throw InvalidOffsetsError("custom offsets must be vectors of length r=" + std::to_string(r));
        std::size_t rank = 0;
        if (!offsets_span(block_offsets, field, &rank))
            throw InvalidOffsetsError("custom offsets fail the spanning check: " + std::to_string(block_offsets.size()) +
                                      " offsets, recovery matrix rank " + std::to_string(rank) + ", need " +
                                      std::to_string(real_dim(field, r) + 1));
    }
    Ensemble e;
    e.field = field;
    e.d = d;
    e.r = r;
    ConstructionMeta meta;
    meta.kind = ConstructionKind::Tight;
    meta.epsilon_dr = d % r == 0 ? 0 : 1;
    const std::size_t full = d / r;
    for (std::size_t t = 0; t < full; ++t) detail::append_block(e, meta, t * r, r, block_offsets);
    if (const std::size_t rest = d - full * r; rest > 0)
        detail::append_block(e, meta, full * r, rest, default_spanning_offsets(rest, field));
    e.meta = std::move(meta);
    return e;
}

/// A non-injective ensemble at Frobenius distance O(delta) from an injective tight one,
/// with the colliding pair that proves it.
struct PerturbationWitness {
    Ensemble base;       // injective tight ensemble
    Ensemble perturbed;  // differs from `base` only in M_1
    Signal x;
    Signal y;
    double delta = 0.0;
};

/// Perturbs M_1 of a tight ensemble so that two explicit signals collide.
///
/// Real: block offsets e_1, 0, e_2, ..., e_r (b_{1,1} = 1, every other first entry 0),
/// M~_1 = M_1 + delta b_{1,1} E_21, x = (b_{1,1}, -1/delta, 0, ...), y = (-b_{1,1}, -1/delta, 0, ...).
/// Complex, r >= 2: default offsets, M~_1 = M_1 + i delta E_12 - i delta E_21,
/// x = (i, -1/(2 delta), 0, ...), y = (-i, -1/(2 delta), 0, ...).
/// Complex, r = 1 (no E_12 in a d x 1 matrix): M~_1 = M_1 - i delta E_21,
/// x = (i, -1/delta, 0, ...), y = (-i, -1/delta, 0, ...).
inline PerturbationWitness perturbed_ensemble(std::size_t d, std::size_t r, FieldTag field, double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw PreconditionError("perturbation needs delta > 0");
    if (d < 2) throw PreconditionError("perturbation needs d >= 2");
    if (r < 1 || r > d) throw PreconditionError("perturbation needs 1 <= r <= d");

    PerturbationWitness out;
    out.delta = delta;
    if (field == FieldTag::Real) {
        std::vector<CVec> offs = default_spanning_offsets(r, field);
        std::swap(offs[0], offs[1]);
        out.base = tight_ensemble(d, r, field, offs);
    } else {
        out.base = tight_ensemble(d, r, field);
    }
    out.perturbed = out.base;
    out.perturbed.meta->kind = ConstructionKind::Perturbed;
    out.perturbed.meta->delta = delta;

    CMatrix& m1 = out.perturbed.pairs.front().M;
    CVec xv(d), yv(d);
    const cdouble i1{0.0, 1.0};
    if (field == FieldTag::Real) {
        const double b11 = out.base.pairs.front().b[0].real();
        m1(1, 0) += delta * b11;
        xv[0] = b11;
        yv[0] = -b11;
        xv[1] = yv[1] = -1.0 / delta;
        out.x = Signal{FieldTag::Real, xv};
        out.y = Signal{FieldTag::Real, yv};
        return out;
    }
    if (r >= 2) {
        m1(0, 1) += i1 * delta;
        m1(1, 0) -= i1 * delta;
        xv[1] = yv[1] = -1.0 / (2.0 * delta);
    } else {
        m1(1, 0) -= i1 * delta;
        xv[1] = yv[1] = -1.0 / delta;
    }
    xv[0] = i1;
    yv[0] = -i1;
    out.x = Signal::complex(xv);
    out.y = Signal::complex(yv);
    return out;
}

/// I.i.d. standard normal entries (independent real and imaginary parts for Complex),
/// drawn pair by pair: M row-major, then b.
inline Ensemble random_ensemble(std::size_t d, std::size_t r, std::size_t m, FieldTag field, std::uint64_t seed) {
    if (d < 1 || r < 1 || m < 1) throw PreconditionError("random ensemble sizes must be >= 1");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&]() -> cdouble {
        const double re = normal(rng);
        const double im = field == FieldTag::Complex ? normal(rng) : 0.0;
        return {re, im};
    };
    Ensemble e;
    e.field = field;
    e.d = d;
    e.r = r;
    e.pairs.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        MeasurementPair p{CMatrix(d, r), CVec(r)};
        for (auto& v : p.M.data()) v = draw();
        for (auto& v : p.b) v = draw();
        e.pairs.push_back(std::move(p));
    }
    e.meta = ConstructionMeta{ConstructionKind::Random, {}, d % r == 0 ? 0 : 1, std::nullopt};
    return e;
}

/// Gaussian signal drawn with the same conventions as random_ensemble.
inline Signal random_signal(std::size_t d, FieldTag field, Rng& rng, double sigma = 1.0) {
    std::normal_distribution<double> normal(0.0, sigma);
    Signal s;
    s.field = field;
    s.entries.resize(d);
    for (auto& v : s.entries) {
        const double re = normal(rng);
        const double im = field == FieldTag::Complex ? normal(rng) : 0.0;
        v = {re, im};
    }
    return s;
}

}  // namespace affine_pr
