#pragma once

// Densities observed on a grid over [a,b]: distributional transforms mapped
// to functional regressors on [0,1], standardized moments, and lagged
// auxiliary series.

#include "funflir/errors.hpp"
#include "funflir/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace funflir {

/// Floor applied to densities and CDF tails before taking logs.
inline constexpr double kLogFloor = 1e-10;

class DensitySample {
public:
    /// `x` ascending support grid, one density per row of `p`. Rows whose
    /// trapezoid mass falls outside [0.99, 1.01] are rescaled to unit mass and
    /// their indices recorded in renormalized().
    DensitySample(std::vector<double> x, RowMatrix p) : x_(std::move(x)), p_(std::move(p)) {
        if (x_.size() < 2) throw InvalidArgument("DensitySample: need at least 2 support points");
        for (std::size_t i = 1; i < x_.size(); ++i)
            if (!(x_[i] > x_[i - 1])) throw InvalidArgument("DensitySample: support grid must be increasing");
        if (static_cast<std::size_t>(p_.cols()) != x_.size())
            throw LengthMismatch("DensitySample: density rows do not match the support grid");
        if (p_.rows() < 1) throw InvalidArgument("DensitySample: no periods");
        for (Eigen::Index t = 0; t < p_.rows(); ++t) {
            for (Eigen::Index i = 0; i < p_.cols(); ++i) {
                const double v = p_(t, i);
                if (!std::isfinite(v) || v < 0.0)
                    throw InvalidArgument("DensitySample: period " + std::to_string(t + 1) +
                                          " has a negative or non-finite density value");
            }
            const double m = mass(t);
            if (!(m > 0.0))
                throw InvalidArgument("DensitySample: period " + std::to_string(t + 1) + " is identically zero");
            if (m < 0.99 || m > 1.01) {
                p_.row(t) /= m;
                renormalized_.push_back(static_cast<std::size_t>(t));
            }
        }
    }

    [[nodiscard]] double a() const { return x_.front(); }
    [[nodiscard]] double b() const { return x_.back(); }
    [[nodiscard]] const std::vector<double>& support() const { return x_; }
    [[nodiscard]] const RowMatrix& values() const { return p_; }
    [[nodiscard]] std::size_t periods() const { return static_cast<std::size_t>(p_.rows()); }
    [[nodiscard]] const std::vector<std::size_t>& renormalized() const { return renormalized_; }

    /// Trapezoid integral of row t.
    [[nodiscard]] double mass(Eigen::Index t) const {
        double m = 0.0;
        for (std::size_t i = 1; i < x_.size(); ++i)
            m += 0.5 * (x_[i] - x_[i - 1]) * (p_(t, static_cast<Eigen::Index>(i)) + p_(t, static_cast<Eigen::Index>(i - 1)));
        return m;
    }

    /// Cumulative trapezoid CDF of row t, scaled so that the last value is 1.
    [[nodiscard]] std::vector<double> cdf(Eigen::Index t) const {
        std::vector<double> P(x_.size(), 0.0);
        for (std::size_t i = 1; i < x_.size(); ++i)
            P[i] = P[i - 1] + 0.5 * (x_[i] - x_[i - 1]) *
                                  (p_(t, static_cast<Eigen::Index>(i)) + p_(t, static_cast<Eigen::Index>(i - 1)));
        const double total = P.back();
        if (!(total > 0.0)) throw InvalidArgument("DensitySample: zero mass");
        for (auto& v : P) v /= total;
        P.back() = 1.0;
        return P;
    }

private:
    std::vector<double> x_;
    RowMatrix p_;
    std::vector<std::size_t> renormalized_;
};

enum class TransformKind { CLR, LHR, LRHR, LCDF, PDF, QF };

[[nodiscard]] inline TransformKind transform_from_name(std::string_view s) {
    if (s == "clr" || s == "CLR") return TransformKind::CLR;
    if (s == "lhr" || s == "LHR") return TransformKind::LHR;
    if (s == "lrhr" || s == "LRHR") return TransformKind::LRHR;
    if (s == "lcdf" || s == "LCDF") return TransformKind::LCDF;
    if (s == "pdf" || s == "PDF") return TransformKind::PDF;
    if (s == "qf" || s == "QF") return TransformKind::QF;
    throw InvalidArgument("unknown transform '" + std::string(s) + "'");
}

/// Probability levels for the quantile function: n points uniform in [lo, hi].
[[nodiscard]] inline std::vector<double> quantile_levels(std::size_t n = 101, double lo = 0.005, double hi = 0.995) {
    if (n < 2 || !(lo > 0.0 && hi < 1.0 && lo < hi)) throw InvalidArgument("quantile_levels: need 0 < lo < hi < 1");
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return s;
}

/// inf{x : P(x) >= s} for the piecewise-linear CDF through (x_i, P_i).
[[nodiscard]] inline double invert_cdf(const std::vector<double>& x, const std::vector<double>& P, double s) {
    for (std::size_t i = 1; i < P.size(); ++i)
        if (P[i] < P[i - 1]) throw InvalidArgument("quantile function: CDF is not monotone");
    if (s <= P.front()) return x.front();
    const auto it = std::lower_bound(P.begin(), P.end(), s);
    if (it == P.end()) return x.back();
    const auto i = static_cast<std::size_t>(it - P.begin());
    const double span = P[i] - P[i - 1];
    if (!(span > 0.0)) return x[i];
    return x[i - 1] + (s - P[i - 1]) / span * (x[i] - x[i - 1]);
}

/// Transform every period, evaluated on the native support and then placed on
/// [0,1] by the affine map x -> (x - a)/(b - a). The quantile function is
/// evaluated at `levels` (mapped affinely onto [0,1]) and returns support values.
/// `floored` counts density/CDF values raised to kLogFloor.
[[nodiscard]] inline FunctionalSeries transform(const DensitySample& d, TransformKind kind,
                                                std::size_t* floored = nullptr,
                                                const std::vector<double>& levels = quantile_levels()) {
    const auto& x = d.support();
    const auto n = static_cast<Eigen::Index>(x.size());
    const auto T = static_cast<Eigen::Index>(d.periods());
    const double a = d.a(), len = d.b() - d.a();
    std::size_t floor_hits = 0;
    const auto lg = [&](double v) {
        if (v < kLogFloor) {
            ++floor_hits;
            v = kLogFloor;
        }
        return std::log(v);
    };

    if (kind == TransformKind::QF) {
        const double lo = levels.front(), hi = levels.back();
        std::vector<double> u(levels.size());
        for (std::size_t i = 0; i < levels.size(); ++i) u[i] = (levels[i] - lo) / (hi - lo);
        const GridPtr grid = Grid::from_points(u);
        RowMatrix out(T, static_cast<Eigen::Index>(levels.size()));
        for (Eigen::Index t = 0; t < T; ++t) {
            const auto P = d.cdf(t);
            for (std::size_t i = 0; i < levels.size(); ++i)
                out(t, static_cast<Eigen::Index>(i)) = invert_cdf(x, P, levels[i]);
        }
        if (floored) *floored = 0;
        return {grid, std::move(out)};
    }

    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = (x[i] - a) / len;
    const GridPtr grid = Grid::from_points(u);
    RowMatrix out(T, n);
    for (Eigen::Index t = 0; t < T; ++t) {
        const auto P = d.cdf(t);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = d.values()(t, i);
            const double c = P[static_cast<std::size_t>(i)];
            switch (kind) {
                case TransformKind::PDF: out(t, i) = p; break;
                case TransformKind::CLR: out(t, i) = lg(p); break;
                case TransformKind::LHR: out(t, i) = lg(p) - lg(1.0 - c); break;
                case TransformKind::LRHR: out(t, i) = lg(p) - lg(c); break;
                case TransformKind::LCDF: out(t, i) = lg(c) - lg(1.0 - c); break;
                case TransformKind::QF: break;
            }
        }
        if (kind == TransformKind::CLR) {
            // Subtract the average of log p over [a,b] (trapezoid).
            double m = 0.0;
            for (Eigen::Index i = 1; i < n; ++i)
                m += 0.5 * (u[static_cast<std::size_t>(i)] - u[static_cast<std::size_t>(i - 1)]) *
                     (out(t, i) + out(t, i - 1));
            out.row(t).array() -= m;
        }
    }
    if (floored) *floored = floor_hits;
    return {grid, std::move(out)};
}

/// Mean, standard deviation, skewness and kurtosis (first K of them) of a
/// density on the support grid, by trapezoid quadrature.
[[nodiscard]] inline std::vector<double> standardized_moments(const std::vector<double>& x, const Vector& p,
                                                              std::size_t K) {
    if (K < 1 || K > 4) throw InvalidArgument("standardized_moments: K must be between 1 and 4");
    if (x.size() != static_cast<std::size_t>(p.size()) || x.size() < 2)
        throw LengthMismatch("standardized_moments: density does not match support");
    const auto integrate = [&](auto&& f) {
        double s = 0.0;
        for (std::size_t i = 1; i < x.size(); ++i)
            s += 0.5 * (x[i] - x[i - 1]) * (f(i) + f(i - 1));
        return s;
    };
    const auto pv = [&](std::size_t i) { return p(static_cast<Eigen::Index>(i)); };
    const double mass = integrate([&](std::size_t i) { return pv(i); });
    if (!(mass > 0.0)) throw InvalidArgument("standardized_moments: zero mass");
    const double mean = integrate([&](std::size_t i) { return x[i] * pv(i); }) / mass;
    std::vector<double> out{mean};
    if (K == 1) return out;
    const auto central = [&](int j) {
        return integrate([&](std::size_t i) { return std::pow(x[i] - mean, j) * pv(i); }) / mass;
    };
    const double var = central(2);
    if (!(var > 0.0)) throw InvalidArgument("standardized_moments: zero variance");
    const double sd = std::sqrt(var);
    out.push_back(sd);
    for (std::size_t j = 3; j <= K; ++j) out.push_back(central(static_cast<int>(j)) / std::pow(sd, static_cast<double>(j)));
    return out;
}

/// Moments for every period: T x K.
[[nodiscard]] inline Matrix standardized_moments(const DensitySample& d, std::size_t K) {
    Matrix out(static_cast<Eigen::Index>(d.periods()), static_cast<Eigen::Index>(K));
    for (Eigen::Index t = 0; t < out.rows(); ++t) {
        const auto m = standardized_moments(d.support(), d.values().row(t).transpose(), K);
        for (std::size_t k = 0; k < K; ++k) out(t, static_cast<Eigen::Index>(k)) = m[k];
    }
    return out;
}

/// Z_t = sum_{j=1..ell} decay^(j-1) X_{t-j} for t = ell+1..T. Row k of the
/// result pairs with row k + ell of the input.
[[nodiscard]] inline FunctionalSeries build_lagged_auxiliary(const FunctionalSeries& X, std::size_t ell,
                                                             double decay = 0.5) {
    if (ell < 1) throw InvalidArgument("build_lagged_auxiliary: ell must be at least 1");
    if (ell >= X.length()) throw InvalidArgument("build_lagged_auxiliary: ell must be smaller than T");
    const auto T = static_cast<Eigen::Index>(X.length());
    const auto L = static_cast<Eigen::Index>(ell);
    RowMatrix Z = RowMatrix::Zero(T - L, X.values().cols());
    double coef = 1.0;
    for (Eigen::Index j = 1; j <= L; ++j) {
        Z += coef * X.values().middleRows(L - j, T - L);
        coef *= decay;
    }
    if (Z.rows() < 2) throw InvalidArgument("build_lagged_auxiliary: fewer than 2 periods remain");
    return {X.grid(), std::move(Z)};
}

/// Drops the first ell periods so that series align with build_lagged_auxiliary.
[[nodiscard]] inline FunctionalSeries trim_front(const FunctionalSeries& X, std::size_t ell) {
    if (ell + 2 > X.length()) throw InvalidArgument("trim_front: too few periods");
    const auto L = static_cast<Eigen::Index>(ell);
    return {X.grid(), X.values().bottomRows(X.values().rows() - L)};
}

[[nodiscard]] inline ScalarSeries trim_front(const ScalarSeries& y, std::size_t ell) {
    if (ell + 2 > y.length()) throw InvalidArgument("trim_front: too few periods");
    return ScalarSeries(y.values().tail(y.values().size() - static_cast<Eigen::Index>(ell)));
}

}  // namespace funflir
