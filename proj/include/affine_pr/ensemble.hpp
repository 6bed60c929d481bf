#pragma once

// Signals, measurement pairs and ensembles over R and C, plus their lifted and
// realified forms.
//
// Scalars are always stored as complex doubles; a Real object carries exactly
// zero imaginary parts. The measurement of a pair (M, b) at x is ||M* x + b||^2.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "affine_pr/errors.hpp"
#include "affine_pr/linalg.hpp"

namespace affine_pr {

enum class FieldTag { Real, Complex };

inline std::string to_string(FieldTag f) { return f == FieldTag::Real ? "real" : "complex"; }

/// Number of real parameters of a d-dimensional signal over the field.
inline std::size_t real_dim(FieldTag f, std::size_t d) { return f == FieldTag::Real ? d : 2 * d; }

struct Signal {
    FieldTag field = FieldTag::Real;
    CVec entries;

    std::size_t dim() const noexcept { return entries.size(); }

    static Signal real(const RVec& v) {
        Signal s;
        s.field = FieldTag::Real;
        s.entries.assign(v.begin(), v.end());
        return s;
    }
    static Signal complex(CVec v) { return Signal{FieldTag::Complex, std::move(v)}; }

    /// Real parameter vector: x itself (Real) or (Re x, Im x) (Complex).
    RVec real_params() const {
        const std::size_t d = dim();
        RVec out(real_dim(field, d));
        for (std::size_t i = 0; i < d; ++i) {
            out[i] = entries[i].real();
            if (field == FieldTag::Complex) out[i + d] = entries[i].imag();
        }
        return out;
    }

    static Signal from_real_params(FieldTag f, const RVec& p) {
        Signal s;
        s.field = f;
        const std::size_t d = f == FieldTag::Real ? p.size() : p.size() / 2;
        s.entries.resize(d);
        for (std::size_t i = 0; i < d; ++i)
            s.entries[i] = f == FieldTag::Real ? cdouble{p[i], 0.0} : cdouble{p[i], p[i + d]};
        return s;
    }

    bool finite() const {
        for (const auto& v : entries)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    friend bool operator==(const Signal&, const Signal&) = default;
};

inline Signal operator+(const Signal& a, const Signal& b) {
    if (a.field != b.field || a.dim() != b.dim()) throw DimensionError("signal sum mismatch");
    Signal s = a;
    for (std::size_t i = 0; i < s.dim(); ++i) s.entries[i] += b.entries[i];
    return s;
}
inline Signal operator-(const Signal& a, const Signal& b) {
    if (a.field != b.field || a.dim() != b.dim()) throw DimensionError("signal difference mismatch");
    Signal s = a;
    for (std::size_t i = 0; i < s.dim(); ++i) s.entries[i] -= b.entries[i];
    return s;
}
inline double norm(const Signal& s) { return norm2(s.entries); }

/// One measurement (M, b): M is d x r, b has length r.
struct MeasurementPair {
    CMatrix M;
    CVec b;

    std::size_t d() const noexcept { return M.rows(); }
    std::size_t r() const noexcept { return M.cols(); }

    friend bool operator==(const MeasurementPair&, const MeasurementPair&) = default;
};

enum class ConstructionKind { Tight, Perturbed, Random, Custom };

inline std::string to_string(ConstructionKind k) {
    switch (k) {
        case ConstructionKind::Tight: return "tight";
        case ConstructionKind::Perturbed: return "perturbed";
        case ConstructionKind::Random: return "random";
        case ConstructionKind::Custom: return "custom";
    }
    return "custom";
}

/// One coordinate block T_t = {start, ..., start + size - 1} (0-based) and the
/// consecutive pairs that measure it through the block offsets.
struct BlockLayout {
    std::size_t start = 0;
    std::size_t size = 0;
    std::size_t first_pair = 0;
    std::size_t pair_count = 0;
    std::vector<CVec> offsets;  // each of length `size`

    friend bool operator==(const BlockLayout&, const BlockLayout&) = default;
};

struct ConstructionMeta {
    ConstructionKind kind = ConstructionKind::Custom;
    std::vector<BlockLayout> blocks;
    int epsilon_dr = 0;
    std::optional<double> delta;

    friend bool operator==(const ConstructionMeta&, const ConstructionMeta&) = default;
};

struct Ensemble {
    FieldTag field = FieldTag::Real;
    std::size_t d = 0;
    std::size_t r = 0;
    std::vector<MeasurementPair> pairs;
    std::optional<ConstructionMeta> meta;

    std::size_t m() const noexcept { return pairs.size(); }
    /// Real parameter count of signals measured by this ensemble.
    std::size_t n() const noexcept { return real_dim(field, d); }

    friend bool operator==(const Ensemble&, const Ensemble&) = default;
};

/// Minimal measurement count d + floor(d/r) (Real) or 2d + floor(d/r) (Complex).
inline std::size_t minimal_count(FieldTag f, std::size_t d, std::size_t r) {
    return real_dim(f, d) + d / r;
}

/// Count achieved by the tight construction: the minimal count plus one when r does not divide d.
inline std::size_t tight_count(FieldTag f, std::size_t d, std::size_t r) {
    return minimal_count(f, d, r) + (d % r == 0 ? 0 : 1);
}

struct ValidationReport {
    std::size_t m = 0;
    std::vector<std::string> problems;

    bool valid() const noexcept { return problems.empty(); }
};

namespace detail {

inline bool finite(cdouble v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

inline void check_meta(const Ensemble& e, ValidationReport& rep) {
    const ConstructionMeta& meta = *e.meta;
    const bool structured = meta.kind == ConstructionKind::Tight || meta.kind == ConstructionKind::Perturbed;
    if (!structured) return;
    const std::size_t d = e.d;
    const std::size_t r = e.r;
    const int expected_eps = d % r == 0 ? 0 : 1;
    if (meta.epsilon_dr != expected_eps)
        rep.problems.push_back("meta epsilon_dr is " + std::to_string(meta.epsilon_dr) + ", expected " +
                               std::to_string(expected_eps));
    if (meta.kind == ConstructionKind::Perturbed && !(meta.delta && *meta.delta > 0.0))
        rep.problems.push_back("meta delta must be > 0 for a perturbed ensemble");
    const std::size_t full = d / r;
    const std::size_t expected_blocks = full + (d % r == 0 ? 0 : 1);
    if (meta.blocks.size() != expected_blocks) {
        rep.problems.push_back("meta has " + std::to_string(meta.blocks.size()) + " blocks, expected " +
                               std::to_string(expected_blocks));
        return;
    }
    std::size_t next_row = 0;
    std::size_t next_pair = 0;
    for (std::size_t t = 0; t < meta.blocks.size(); ++t) {
        const BlockLayout& blk = meta.blocks[t];
        const std::string tag = "meta block " + std::to_string(t + 1);
        const std::size_t want_size = t < full ? r : d - r * full;
        if (blk.start != next_row || blk.size != want_size)
            rep.problems.push_back(tag + " covers rows [" + std::to_string(blk.start) + ", " +
                                   std::to_string(blk.start + blk.size) + "), expected [" +
                                   std::to_string(next_row) + ", " + std::to_string(next_row + want_size) + ")");
        next_row = blk.start + blk.size;
        const std::size_t want_pairs = e.field == FieldTag::Real ? blk.size + 1 : 2 * blk.size + 1;
        if (blk.offsets.size() != want_pairs || blk.pair_count != want_pairs)
            rep.problems.push_back(tag + " has " + std::to_string(blk.offsets.size()) + " offsets, expected " +
                                   std::to_string(want_pairs));
        for (const auto& off : blk.offsets)
            if (off.size() != blk.size) rep.problems.push_back(tag + " offset length differs from block size");
        if (blk.first_pair != next_pair)
            rep.problems.push_back(tag + " starts at pair " + std::to_string(blk.first_pair + 1) + ", expected " +
                                   std::to_string(next_pair + 1));
        next_pair = blk.first_pair + blk.pair_count;
    }
    if (next_row != d) rep.problems.push_back("meta blocks do not partition the d coordinates");
    if (next_pair != e.m())
        rep.problems.push_back("meta blocks cover " + std::to_string(next_pair) + " pairs, ensemble has " +
                               std::to_string(e.m()));
    if (!rep.problems.empty() || meta.kind != ConstructionKind::Tight) return;

    // Tight pairs must have (M_j)_{T_t} = [I | 0] and b_j = zero-padded block offset.
    for (const BlockLayout& blk : meta.blocks) {
        for (std::size_t k = 0; k < blk.pair_count; ++k) {
            const std::size_t j = blk.first_pair + k;
            const MeasurementPair& p = e.pairs[j];
            bool ok = true;
            for (std::size_t i = 0; i < d && ok; ++i)
                for (std::size_t c = 0; c < r && ok; ++c) {
                    const bool in_block = i >= blk.start && i < blk.start + blk.size;
                    const cdouble want = (in_block && i - blk.start == c) ? cdouble{1.0} : cdouble{};
                    ok = p.M(i, c) == want;
                }
            for (std::size_t c = 0; c < r && ok; ++c) {
                const cdouble want = c < blk.size ? blk.offsets[k][c] : cdouble{};
                ok = p.b[c] == want;
            }
            if (!ok) rep.problems.push_back("pair " + std::to_string(j + 1) + " does not match its tight block layout");
        }
    }
}

}  // namespace detail

/// Checks dimension consistency, finiteness, field consistency and meta invariants.
/// Never judges injectivity.
inline ValidationReport validate_ensemble(const Ensemble& e) {
    ValidationReport rep;
    rep.m = e.m();
    if (e.d < 1) rep.problems.push_back("d must be >= 1");
    if (e.r < 1) rep.problems.push_back("r must be >= 1");
    if (e.pairs.empty()) rep.problems.push_back("m must be >= 1");
    for (std::size_t j = 0; j < e.pairs.size(); ++j) {
        const MeasurementPair& p = e.pairs[j];
        const std::string tag = "pair " + std::to_string(j + 1);
        if (p.M.rows() != e.d)
            rep.problems.push_back(tag + " has d=" + std::to_string(p.M.rows()) + ", ensemble d=" + std::to_string(e.d));
        if (p.M.cols() != e.r)
            rep.problems.push_back(tag + " has r=" + std::to_string(p.M.cols()) + ", ensemble r=" + std::to_string(e.r));
        if (p.b.size() != e.r)
            rep.problems.push_back(tag + " has offset length " + std::to_string(p.b.size()) + ", ensemble r=" +
                                   std::to_string(e.r));
        bool finite = true;
        bool real = true;
        for (const auto& v : p.M.data()) {
            finite = finite && detail::finite(v);
            real = real && v.imag() == 0.0;
        }
        for (const auto& v : p.b) {
            finite = finite && detail::finite(v);
            real = real && v.imag() == 0.0;
        }
        if (!finite) rep.problems.push_back(tag + " has non-finite entries");
        if (e.field == FieldTag::Real && !real) rep.problems.push_back(tag + " has imaginary parts in a real ensemble");
    }
    if (rep.valid() && e.meta) detail::check_meta(e, rep);
    return rep;
}

/// Throws DimensionError unless `x` can be measured by `e`.
inline void check_signal(const Ensemble& e, const Signal& x) {
    if (x.field != e.field)
        throw DimensionError("signal field " + to_string(x.field) + " does not match ensemble field " + to_string(e.field));
    if (x.dim() != e.d)
        throw DimensionError("signal has length " + std::to_string(x.dim()) + ", ensemble d=" + std::to_string(e.d));
}

/// Hermitian (d+1) x (d+1) matrix A with (x,1)* A (x,1) = ||M* x + b||^2.
struct LiftedMatrix {
    CMatrix A;
};

inline LiftedMatrix lift_measurement(const MeasurementPair& p) {
    const std::size_t d = p.d();
    const CMatrix mm = p.M * p.M.adjoint();
    const CVec mb = p.M * p.b;
    cdouble bb{};
    for (const auto& v : p.b) bb += std::norm(v);
    LiftedMatrix out{CMatrix(d + 1, d + 1)};
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) out.A(i, j) = mm(i, j);
        out.A(i, d) = mb[i];
        out.A(d, i) = std::conj(mb[i]);
    }
    out.A(d, d) = bb;
    return out;
}

/// Quadratic-plus-linear real form u^T F u + 2 c^T u + const_term of a measurement.
struct RealifiedPair {
    RMatrix F;
    RVec c;
    double const_term = 0.0;

    double evaluate(std::span<const double> u) const {
        const RVec fu = F * u;
        return dot(u, fu) + 2.0 * dot(c, u) + const_term;
    }
};

/// F = [[B, -C], [C, B]] with M M* = B + iC, c = (Re Mb, Im Mb), const_term = b* b.
/// Always 2d-dimensional; a real pair yields C = 0.
inline RealifiedPair realify_pair(const MeasurementPair& p) {
    const std::size_t d = p.d();
    const CMatrix mm = p.M * p.M.adjoint();
    const CVec mb = p.M * p.b;
    RealifiedPair out{RMatrix(2 * d, 2 * d), RVec(2 * d), 0.0};
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double bij = mm(i, j).real();
            const double cij = mm(i, j).imag();
            out.F(i, j) = bij;
            out.F(i + d, j + d) = bij;
            out.F(i, j + d) = -cij;
            out.F(i + d, j) = cij;
        }
        out.c[i] = mb[i].real();
        out.c[i + d] = mb[i].imag();
    }
    for (const auto& v : p.b) out.const_term += std::norm(v);
    return out;
}

/// The measurement as a real quadratic in the signal's real parameters (d for Real, 2d for Complex).
inline RealifiedPair quadratic_form(const MeasurementPair& p, FieldTag field) {
    if (field == FieldTag::Complex) return realify_pair(p);
    const std::size_t d = p.d();
    const std::size_t r = p.r();
    RealifiedPair out{RMatrix(d, d), RVec(d), 0.0};
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < r; ++k) s += p.M(i, k).real() * p.M(j, k).real();
            out.F(i, j) = s;
        }
        double s = 0.0;
        for (std::size_t k = 0; k < r; ++k) s += p.M(i, k).real() * p.b[k].real();
        out.c[i] = s;
    }
    for (const auto& v : p.b) out.const_term += v.real() * v.real();
    return out;
}

/// Real affine map u -> L u + beta equal to M* x + b in real coordinates
/// (r rows for Real, 2r rows (Re, Im) for Complex).
struct RealAffineMap {
    RMatrix L;
    RVec beta;
};

inline RealAffineMap realified_affine_map(const MeasurementPair& p, FieldTag field) {
    const std::size_t d = p.d();
    const std::size_t r = p.r();
    if (field == FieldTag::Real) {
        RealAffineMap out{RMatrix(r, d), RVec(r)};
        for (std::size_t k = 0; k < r; ++k) {
            for (std::size_t i = 0; i < d; ++i) out.L(k, i) = p.M(i, k).real();
            out.beta[k] = p.b[k].real();
        }
        return out;
    }
    // (M* x)_k = sum_i conj(M_ik) x_i
    RealAffineMap out{RMatrix(2 * r, 2 * d), RVec(2 * r)};
    for (std::size_t k = 0; k < r; ++k) {
        for (std::size_t i = 0; i < d; ++i) {
            const double mr = p.M(i, k).real();
            const double mi = p.M(i, k).imag();
            out.L(k, i) = mr;
            out.L(k, i + d) = mi;
            out.L(k + r, i) = -mi;
            out.L(k + r, i + d) = mr;
        }
        out.beta[k] = p.b[k].real();
        out.beta[k + r] = p.b[k].imag();
    }
    return out;
}

/// (d+1)-vector (x, 1).
inline CVec augment(const Signal& x) {
    CVec out = x.entries;
    out.push_back(cdouble{1.0});
    return out;
}

}  // namespace affine_pr
