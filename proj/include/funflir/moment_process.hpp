#pragma once

// Partial-sum moment processes S(i/T) = (1/T) sum_{t<=i} Z_t u_{0,t} and the
// centered, residualized and multi-regressor variants.

#include "funflir/errors.hpp"
#include "funflir/hilbert.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace funflir {

/// Values at r_i = i/T for i = 0..T; row 0 is the zero curve.
class MomentProcess {
public:
    MomentProcess(GridPtr grid, RowMatrix values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.rows() < 2) throw InvalidArgument("MomentProcess: need T >= 1");
        if (static_cast<std::size_t>(values_.cols()) != grid_->size())
            throw LengthMismatch("MomentProcess: column count does not match grid");
    }

    /// Process built from per-period products v_t (row t-1 of `products`).
    static MomentProcess from_products(const GridPtr& grid, const RowMatrix& products) {
        const auto T = products.rows();
        RowMatrix vals(T + 1, products.cols());
        vals.row(0).setZero();
        const double inv_t = 1.0 / static_cast<double>(T);
        for (Eigen::Index t = 0; t < T; ++t) vals.row(t + 1) = vals.row(t) + inv_t * products.row(t);
        return {grid, std::move(vals)};
    }

    [[nodiscard]] std::size_t T() const { return static_cast<std::size_t>(values_.rows() - 1); }
    [[nodiscard]] const GridPtr& grid() const { return grid_; }
    [[nodiscard]] const RowMatrix& values() const { return values_; }
    [[nodiscard]] Curve at(std::size_t i) const {
        return {grid_, values_.row(static_cast<Eigen::Index>(i)).transpose()};
    }

private:
    GridPtr grid_;
    RowMatrix values_;
};

namespace detail {

inline void require_aligned(std::size_t a, std::size_t b, const char* where) {
    if (a != b) throw LengthMismatch(std::string(where) + ": series lengths differ");
}

/// Row t scaled by u_t.
inline RowMatrix scale_rows(const RowMatrix& m, const Vector& u) { return u.asDiagonal() * m; }

inline RowMatrix demeaned(const RowMatrix& m) { return m.rowwise() - m.colwise().mean(); }

}  // namespace detail

/// u_{0,t} = y_t - <X_t, theta0>.
[[nodiscard]] inline Vector null_residuals(const ScalarSeries& y, const FunctionalSeries& X, const Curve& theta0) {
    detail::require_aligned(y.length(), X.length(), "null_residuals");
    require_same_grid(X.grid(), theta0.grid(), "null_residuals");
    return y.values() - X.project(theta0);
}

[[nodiscard]] inline MomentProcess moment_process(const FunctionalSeries& Z, const ScalarSeries& y,
                                                  const FunctionalSeries& X, const Curve& theta0) {
    detail::require_aligned(Z.length(), y.length(), "moment_process");
    const Vector u0 = null_residuals(y, X, theta0);
    return MomentProcess::from_products(Z.grid(), detail::scale_rows(Z.values(), u0));
}

/// Fully sample-centered products (Z_t - Zbar){(y_t - ybar) - <X_t - Xbar, theta0>}.
[[nodiscard]] inline MomentProcess centered_moment_process(const FunctionalSeries& Z, const ScalarSeries& y,
                                                           const FunctionalSeries& X, const Curve& theta0) {
    detail::require_aligned(Z.length(), y.length(), "centered_moment_process");
    Vector u0 = null_residuals(y, X, theta0);
    u0.array() -= u0.mean();
    return MomentProcess::from_products(Z.grid(), detail::scale_rows(detail::demeaned(Z.values()), u0));
}

/// Least-squares split of a series into its projection on scalar covariates
/// and the residual. `coefficients` is K x n (n = 1 for scalar targets).
template <class Series>
struct Residualization {
    Series fitted;
    Series residuals;
    Matrix coefficients;
};

namespace detail {

inline constexpr double kMaxCovariateCondition = 1e12;

inline Matrix covariate_matrix(const std::vector<ScalarSeries>& covariates, std::size_t T) {
    Matrix W(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(covariates.size()));
    for (std::size_t k = 0; k < covariates.size(); ++k) {
        require_aligned(covariates[k].length(), T, "residualize_scalar");
        W.col(static_cast<Eigen::Index>(k)) = covariates[k].values();
    }
    return W;
}

// Solves the normal equations (W'W/T) B = W'Y/T with a conditioning guard.
inline Matrix projection_coefficients(const Matrix& W, const Matrix& Y) {
    const double T = static_cast<double>(W.rows());
    const Matrix gram = (W.transpose() * W) / T;
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxCovariateCondition)
        throw SingularCovariates("residualize_scalar: covariate Gram matrix is singular or ill-conditioned");
    return gram.ldlt().solve((W.transpose() * Y) / T);
}

}  // namespace detail

[[nodiscard]] inline Residualization<ScalarSeries> residualize_scalar(const ScalarSeries& target,
                                                                      const std::vector<ScalarSeries>& covariates) {
    const std::size_t T = target.length();
    if (covariates.empty())
        return {ScalarSeries(Vector::Zero(static_cast<Eigen::Index>(T))), target, Matrix(0, 1)};
    const Matrix W = detail::covariate_matrix(covariates, T);
    Matrix B = detail::projection_coefficients(W, target.values());
    Vector fitted = W * B;
    Vector resid = target.values() - fitted;
    return {ScalarSeries(std::move(fitted)), ScalarSeries(std::move(resid)), std::move(B)};
}

[[nodiscard]] inline Residualization<FunctionalSeries> residualize_scalar(
    const FunctionalSeries& target, const std::vector<ScalarSeries>& covariates) {
    const std::size_t T = target.length();
    const auto n = target.values().cols();
    if (covariates.empty())
        return {FunctionalSeries(target.grid(), RowMatrix::Zero(static_cast<Eigen::Index>(T), n)), target,
                Matrix(0, n)};
    const Matrix W = detail::covariate_matrix(covariates, T);
    const Matrix Y = target.values();
    Matrix B = detail::projection_coefficients(W, Y);
    RowMatrix fitted = W * B;
    RowMatrix resid = target.values() - fitted;
    return {FunctionalSeries(target.grid(), std::move(fitted)), FunctionalSeries(target.grid(), std::move(resid)),
            std::move(B)};
}

[[nodiscard]] inline MomentProcess residualized_moment_process(const FunctionalSeries& Z, const ScalarSeries& y,
                                                               const FunctionalSeries& X, const Curve& theta0,
                                                               const std::vector<ScalarSeries>& covariates) {
    detail::require_aligned(Z.length(), y.length(), "residualized_moment_process");
    detail::require_aligned(X.length(), y.length(), "residualized_moment_process");
    if (covariates.empty()) return moment_process(Z, y, X, theta0);
    const auto zr = residualize_scalar(Z, covariates);
    const auto yr = residualize_scalar(y, covariates);
    const auto xr = residualize_scalar(X, covariates);
    return moment_process(zr.residuals, yr.residuals, xr.residuals, theta0);
}

/// u_{K,0,t} = y_t - sum_j <X_{j,t}, theta_{0,j}>.
[[nodiscard]] inline Vector multi_null_residuals(const ScalarSeries& y, const std::vector<FunctionalSeries>& Xs,
                                                 const std::vector<Curve>& theta0s) {
    if (Xs.empty()) throw InvalidArgument("multi_moment_process: need at least one regressor");
    if (Xs.size() != theta0s.size())
        throw LengthMismatch("multi_moment_process: regressor and null-slope counts differ");
    Vector u0 = y.values();
    for (std::size_t j = 0; j < Xs.size(); ++j) {
        detail::require_aligned(Xs[j].length(), y.length(), "multi_moment_process");
        require_same_grid(Xs[j].grid(), theta0s[j].grid(), "multi_moment_process");
        u0 -= Xs[j].project(theta0s[j]);
    }
    return u0;
}

[[nodiscard]] inline MomentProcess multi_moment_process(const FunctionalSeries& Z, const ScalarSeries& y,
                                                        const std::vector<FunctionalSeries>& Xs,
                                                        const std::vector<Curve>& theta0s) {
    detail::require_aligned(Z.length(), y.length(), "multi_moment_process");
    const Vector u0 = multi_null_residuals(y, Xs, theta0s);
    return MomentProcess::from_products(Z.grid(), detail::scale_rows(Z.values(), u0));
}

}  // namespace funflir
