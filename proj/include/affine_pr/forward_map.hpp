#pragma once

// The measurement map x -> (||M_j* x + b_j||^2)_j, its polarization identity,
// Jacobian, and the spectral injectivity margin.

#include <algorithm>
#include <cmath>
#include <vector>

#include "affine_pr/ensemble.hpp"
#include "affine_pr/linalg.hpp"

namespace affine_pr {

/// Squared norms y_j, one per pair.
using MeasurementVector = RVec;

/// M* x + b for one pair.
inline CVec affine_image(const MeasurementPair& p, const Signal& x) {
    const std::size_t d = p.d();
    const std::size_t r = p.r();
    CVec z = p.b;
    for (std::size_t k = 0; k < r; ++k) {
        cdouble acc{};
        for (std::size_t i = 0; i < d; ++i) acc += std::conj(p.M(i, k)) * x.entries[i];
        z[k] += acc;
    }
    return z;
}

inline double measure_pair(const MeasurementPair& p, const Signal& x) {
    double s = 0.0;
    for (const auto& v : affine_image(p, x)) s += std::norm(v);
    return s;
}

inline MeasurementVector measure(const Ensemble& e, const Signal& x) {
    check_signal(e, x);
    MeasurementVector y(e.m());
    for (std::size_t j = 0; j < e.m(); ++j) y[j] = measure_pair(e.pairs[j], x);
    return y;
}

/// 1 + max_j |y_j|: the magnitude against which rounding in a measurement vector is judged.
inline double measurement_scale(std::span<const double> y) {
    double s = 0.0;
    for (double v : y) s = std::max(s, std::abs(v));
    return 1.0 + s;
}
inline double measurement_scale(const MeasurementVector& y) { return measurement_scale(std::span<const double>(y)); }

/// 1 + max_j max(||M_j* x + b_j||, ||M_j* y + b_j||).
///
/// A measurement gap is <z_x - z_y, z_x + z_y> for the affine images z, so it
/// scales linearly with the image magnitude at fixed separation.
inline double witness_scale(const Ensemble& e, const Signal& x, const Signal& y) {
    double s = 0.0;
    for (const auto& p : e.pairs)
        s = std::max({s, norm2(affine_image(p, x)), norm2(affine_image(p, y))});
    return 1.0 + s;
}

/// ||M* x + b||^2 - ||M* y + b||^2 evaluated as 4 Re(u* M M* v + (Mb)* v),
/// u = (x + y)/2, v = (x - y)/2.
inline double polarization_gap(const MeasurementPair& p, const Signal& x, const Signal& y) {
    if (x.dim() != p.d() || y.dim() != p.d() || x.field != y.field)
        throw DimensionError("polarization_gap: signal and pair dimensions differ");
    const std::size_t d = p.d();
    CVec u(d), v(d);
    for (std::size_t i = 0; i < d; ++i) {
        u[i] = 0.5 * (x.entries[i] + y.entries[i]);
        v[i] = 0.5 * (x.entries[i] - y.entries[i]);
    }
    const CMatrix mm = p.M * p.M.adjoint();
    const CVec mmv = mm * v;
    const CVec mb = p.M * p.b;
    return 4.0 * (cdot(u, mmv) + cdot(mb, v)).real();
}

/// Each pair's measurement as a real quadratic in the signal's real parameters.
/// Building it once amortizes the M M* products over repeated Jacobian/margin work.
class ForwardModel {
public:
    explicit ForwardModel(const Ensemble& e) : field_(e.field), d_(e.d), n_(e.n()) {
        forms_.reserve(e.m());
        for (const auto& p : e.pairs) forms_.push_back(quadratic_form(p, e.field));
    }

    FieldTag field() const noexcept { return field_; }
    std::size_t d() const noexcept { return d_; }
    std::size_t n() const noexcept { return n_; }
    std::size_t m() const noexcept { return forms_.size(); }
    const RealifiedPair& form(std::size_t j) const { return forms_[j]; }

    /// w_j(u) = F_j u + c_j; the Jacobian column is 2 w_j.
    RVec w(std::size_t j, std::span<const double> u) const {
        RVec out = forms_[j].F * u;
        for (std::size_t i = 0; i < n_; ++i) out[i] += forms_[j].c[i];
        return out;
    }

    RVec values(std::span<const double> u) const {
        RVec y(m());
        for (std::size_t j = 0; j < m(); ++j) y[j] = forms_[j].evaluate(u);
        return y;
    }

    /// n x m real Jacobian of the measurement map at u.
    RMatrix jacobian(std::span<const double> u) const {
        check(u);
        RMatrix jac(n_, m());
        for (std::size_t j = 0; j < m(); ++j) {
            const RVec wj = w(j, u);
            for (std::size_t i = 0; i < n_; ++i) jac(i, j) = 2.0 * wj[i];
        }
        return jac;
    }

    /// G(u) = sum_j w_j w_j^T = J J^T / 4.
    RMatrix gram(std::span<const double> u) const {
        check(u);
        RMatrix g(n_, n_);
        for (std::size_t j = 0; j < m(); ++j) {
            const RVec wj = w(j, u);
            for (std::size_t a = 0; a < n_; ++a)
                for (std::size_t b = 0; b < n_; ++b) g(a, b) += wj[a] * wj[b];
        }
        return g;
    }

private:
    void check(std::span<const double> u) const {
        if (u.size() != n_)
            throw DimensionError("parameter vector has length " + std::to_string(u.size()) + ", expected " +
                                 std::to_string(n_));
    }

    FieldTag field_;
    std::size_t d_;
    std::size_t n_;
    std::vector<RealifiedPair> forms_;
};

/// Column j is the gradient of y_j with respect to the real parameters of x
/// (d x m for Real, 2d x m with (Re, Im) ordering for Complex).
inline RMatrix jacobian(const Ensemble& e, const Signal& x) {
    check_signal(e, x);
    return ForwardModel(e).jacobian(x.real_params());
}

struct MarginResult {
    double value = 0.0;  // smallest eigenvalue of G(u), clamped at 0
    RVec direction;      // unit eigenvector for `value`
    double largest = 0.0;  // largest eigenvalue of G(u)

    /// Threshold below which the Gram matrix counts as rank deficient.
    double rank_threshold() const { return 1e-9 * std::max(1.0, largest); }
    bool rank_deficient() const { return value <= rank_threshold(); }
};

inline MarginResult margin_from_gram(const RMatrix& g) {
    const SymmetricEigen eg = jacobi_eigen(g);
    MarginResult out;
    out.value = std::max(0.0, eg.values.front());
    out.largest = eg.values.back();
    out.direction = eg.vector(0);
    return out;
}

inline MarginResult margin(const ForwardModel& model, std::span<const double> u) {
    return margin_from_gram(model.gram(u));
}

/// Smallest eigenvalue of the Gram matrix of the Jacobian columns at u; zero exactly
/// when the columns fail to span, in which case `direction` is a collision direction.
inline MarginResult margin(const Ensemble& e, const Signal& u) {
    check_signal(e, u);
    return margin(ForwardModel(e), u.real_params());
}

}  // namespace affine_pr
