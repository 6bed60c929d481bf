#pragma once

// Signal recovery: exact block-wise linear solves for tight ensembles and a
// multistart Levenberg-Marquardt fallback for arbitrary ensembles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "affine_pr/constructions.hpp"
#include "affine_pr/ensemble.hpp"
#include "affine_pr/errors.hpp"
#include "affine_pr/forward_map.hpp"
#include "affine_pr/linalg.hpp"
#include "affine_pr/rng.hpp"

namespace affine_pr {

struct BlockSolution {
    CVec z;                // recovered block
    double s = 0.0;        // recovered ||z||^2, solved as an independent unknown
    double residual = 0.0; // |s - ||z||^2|
    bool consistent = true;
};

/// Solves y_k - ||b'_k||^2 = s + 2 Re<b'_k, z> for (z, s). A consistency residual
/// |s - ||z||^2| above 1e-8 (1 + |s|) means the block measurements are not realizable.
inline BlockSolution block_recover(const std::vector<CVec>& offsets, std::span<const double> y_block, FieldTag field) {
    if (offsets.empty()) throw PreconditionError("block_recover needs offsets");
    if (y_block.size() != offsets.size())
        throw DimensionError("block has " + std::to_string(offsets.size()) + " offsets but " +
                             std::to_string(y_block.size()) + " measurements");
    const std::size_t r = offsets.front().size();
    const std::size_t unknowns = real_dim(field, r) + 1;
    const RMatrix a = block_recovery_matrix(offsets, field);
    if (a.rows() != unknowns) throw SingularSystemError(numerical_rank(a), unknowns, "block offsets");
    const LuDecomposition<double> lu(a);
    if (lu.singular()) throw SingularSystemError(numerical_rank(a), unknowns, "block offsets");

    RVec rhs(offsets.size());
    for (std::size_t k = 0; k < offsets.size(); ++k) {
        double bb = 0.0;
        for (const auto& v : offsets[k]) bb += std::norm(v);
        rhs[k] = y_block[k] - bb;
    }
    const RVec sol = lu.solve(rhs);

    BlockSolution out;
    out.z.resize(r);
    for (std::size_t i = 0; i < r; ++i)
        out.z[i] = field == FieldTag::Real ? cdouble{sol[i], 0.0} : cdouble{sol[i], sol[i + r]};
    out.s = sol.back();
    out.residual = std::abs(out.s - std::pow(norm2(out.z), 2));
    out.consistent = out.residual <= 1e-8 * (1.0 + std::abs(out.s));
    return out;
}

struct TightRecovery {
    Signal x;
    std::vector<BlockSolution> blocks;

    bool consistent() const {
        return std::all_of(blocks.begin(), blocks.end(), [](const BlockSolution& b) { return b.consistent; });
    }
    double max_residual() const {
        double s = 0.0;
        for (const auto& b : blocks) s = std::max(s, b.residual);
        return s;
    }
};

/// Recovers x block by block from the measurements of a tight ensemble.
inline TightRecovery tight_recover(const Ensemble& e, std::span<const double> y) {
    if (!e.meta || e.meta->kind != ConstructionKind::Tight)
        throw PreconditionError("tight_recover needs an ensemble built by tight_ensemble");
    if (y.size() != e.m())
        throw DimensionError("measurement vector has length " + std::to_string(y.size()) + ", ensemble m=" +
                             std::to_string(e.m()));
    TightRecovery out;
    out.x.field = e.field;
    out.x.entries.assign(e.d, cdouble{});
    for (std::size_t t = 0; t < e.meta->blocks.size(); ++t) {
        const BlockLayout& blk = e.meta->blocks[t];
        try {
            BlockSolution sol = block_recover(blk.offsets, y.subspan(blk.first_pair, blk.pair_count), e.field);
            for (std::size_t i = 0; i < blk.size; ++i) out.x.entries[blk.start + i] = sol.z[i];
            out.blocks.push_back(std::move(sol));
        } catch (const SingularSystemError& err) {
            throw SingularSystemError(err.rank(), err.size(), "block " + std::to_string(t + 1));
        }
    }
    return out;
}
inline TightRecovery tight_recover(const Ensemble& e, const MeasurementVector& y) {
    return tight_recover(e, std::span<const double>(y));
}

struct LsqOptions {
    int restarts = 20;
    int max_iter = 200;
    double tol = 1e-10;
    std::uint64_t seed = 0;
    double init_sigma = 1.0;  // standard deviation of Gaussian starting points
};

struct RecoveryReport {
    Signal x;
    bool success = false;
    int iterations = 0;     // iterations of the selected restart
    int restarts_used = 0;
    int best_restart = -1;
    double residual = 0.0;  // ||measure(E, x) - y||
};

namespace detail {

struct LmRun {
    RVec p;
    double residual = 0.0;
    int iterations = 0;
};

inline LmRun levenberg_marquardt(const ForwardModel& model, std::span<const double> y, RVec p, int max_iter) {
    const std::size_t n = model.n();
    const std::size_t m = model.m();
    auto residuals = [&](const RVec& q) {
        RVec res = model.values(q);
        for (std::size_t j = 0; j < m; ++j) res[j] -= y[j];
        return res;
    };
    RVec res = residuals(p);
    double cost = dot(res, res);
    double mu = -1.0;
    int it = 0;
    for (; it < max_iter && cost > 0.0; ++it) {
        const RMatrix jt = model.jacobian(p);  // n x m, i.e. J^T
        RMatrix jtj(n, n);
        RVec g(n, 0.0);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                double s = 0.0;
                for (std::size_t j = 0; j < m; ++j) s += jt(a, j) * jt(b, j);
                jtj(a, b) = s;
            }
            for (std::size_t j = 0; j < m; ++j) g[a] += jt(a, j) * res[j];
        }
        if (mu < 0.0) {
            double tr = 0.0;
            for (std::size_t a = 0; a < n; ++a) tr += jtj(a, a);
            mu = tr > 0.0 ? 1e-3 * tr / static_cast<double>(n) : 1e-3;
        }
        bool accepted = false;
        while (!accepted && mu < 1e20) {
            RMatrix sys = jtj;
            for (std::size_t a = 0; a < n; ++a) sys(a, a) += mu;
            RVec rhs(n);
            for (std::size_t a = 0; a < n; ++a) rhs[a] = -g[a];
            RVec step;
            try {
                step = lu_solve(sys, rhs, 1e-15);
            } catch (const SingularSystemError&) {
                mu *= 10.0;
                continue;
            }
            RVec trial = p;
            for (std::size_t a = 0; a < n; ++a) trial[a] += step[a];
            const RVec trial_res = residuals(trial);
            const double trial_cost = dot(trial_res, trial_res);
            if (trial_cost < cost) {
                const double step_norm = norm2(step);
                p = std::move(trial);
                res = trial_res;
                cost = trial_cost;
                mu /= 10.0;
                accepted = true;
                if (step_norm <= 1e-15 * (1.0 + norm2(p))) {
                    return {p, std::sqrt(cost), it + 1};
                }
            } else {
                mu *= 10.0;
            }
        }
        if (!accepted) break;
    }
    return {p, std::sqrt(cost), it};
}

}  // namespace detail

/// Multistart Levenberg-Marquardt on the real parameters of x. Restart 0 starts at the
/// origin, restart k > 0 at a Gaussian point drawn from mix_seed(seed, k). Success iff the
/// selected residual is at most tol (1 + ||y||). All restarts run and the report keeps the
/// best by (success, residual, restart index).
inline RecoveryReport lsq_recover(const Ensemble& e, std::span<const double> y, const LsqOptions& opts = {}) {
    if (y.size() != e.m())
        throw DimensionError("measurement vector has length " + std::to_string(y.size()) + ", ensemble m=" +
                             std::to_string(e.m()));
    const ForwardModel model(e);
    const double target = opts.tol * (1.0 + norm2(y));
    RecoveryReport best;
    best.x.field = e.field;
    best.x.entries.assign(e.d, cdouble{});
    const int restarts = std::max(1, opts.restarts);
    for (int k = 0; k < restarts; ++k) {
        RVec p0(model.n(), 0.0);
        if (k > 0) {
            Rng rng(mix_seed(opts.seed, static_cast<std::uint64_t>(k)));
            std::normal_distribution<double> normal(0.0, opts.init_sigma);
            for (auto& v : p0) v = normal(rng);
        }
        const detail::LmRun run = detail::levenberg_marquardt(model, y, std::move(p0), opts.max_iter);
        const bool ok = run.residual <= target;
        const bool better = best.best_restart < 0 || (ok && !best.success) ||
                            (ok == best.success && run.residual < best.residual);
        if (better) {
            best.x = Signal::from_real_params(e.field, run.p);
            best.success = ok;
            best.iterations = run.iterations;
            best.best_restart = k;
            best.residual = run.residual;
        }
    }
    best.restarts_used = restarts;
    // Report the residual of the measurement map itself rather than the realified model.
    const MeasurementVector fx = measure(e, best.x);
    double r2 = 0.0;
    for (std::size_t j = 0; j < fx.size(); ++j) r2 += (fx[j] - y[j]) * (fx[j] - y[j]);
    best.residual = std::sqrt(r2);
    best.success = best.residual <= target;
    return best;
}
inline RecoveryReport lsq_recover(const Ensemble& e, const MeasurementVector& y, const LsqOptions& opts = {}) {
    return lsq_recover(e, std::span<const double>(y), opts);
}

}  // namespace affine_pr
