#pragma once

// Discretized L2[0,1]: curves are sampled on a shared grid and integrals use
// trapezoid quadrature. Operators are stored as kernel matrices K so that
// (A v)(s_i) = sum_j K(s_i, s_j) w_j v(s_j).

#include "funflir/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace funflir {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

class Grid {
public:
    /// n equally spaced points on [0,1]. n == 1 gives the one-point scalar grid.
    static GridPtr uniform(std::size_t n) {
        if (n == 0) throw InvalidArgument("Grid::uniform: n must be positive");
        if (n == 1) return from_points({0.0});
        std::vector<double> pts(n);
        for (std::size_t i = 0; i < n; ++i)
            pts[i] = static_cast<double>(i) / static_cast<double>(n - 1);
        pts.back() = 1.0;
        return from_points(std::move(pts));
    }

    /// Arbitrary ascending points with first 0 and last 1. A single point is
    /// accepted as the scalar grid (weight 1), which turns every operation
    /// into its real-valued analogue.
    static GridPtr from_points(std::vector<double> pts) {
        if (pts.empty()) throw InvalidArgument("Grid: no points");
        for (double p : pts)
            if (!std::isfinite(p)) throw InvalidArgument("Grid: non-finite point");
        Vector w(static_cast<Eigen::Index>(pts.size()));
        if (pts.size() == 1) {
            w(0) = 1.0;
        } else {
            for (std::size_t i = 1; i < pts.size(); ++i)
                if (!(pts[i] > pts[i - 1]))
                    throw InvalidArgument("Grid: points must be strictly increasing");
            if (std::abs(pts.front()) > 1e-12 || std::abs(pts.back() - 1.0) > 1e-12)
                throw InvalidArgument("Grid: points must start at 0 and end at 1");
            pts.front() = 0.0;
            pts.back() = 1.0;
            const auto n = pts.size();
            w(0) = 0.5 * (pts[1] - pts[0]);
            w(static_cast<Eigen::Index>(n - 1)) = 0.5 * (pts[n - 1] - pts[n - 2]);
            for (std::size_t i = 1; i + 1 < n; ++i)
                w(static_cast<Eigen::Index>(i)) = 0.5 * (pts[i + 1] - pts[i - 1]);
        }
        return GridPtr(new Grid(std::move(pts), std::move(w)));
    }

    [[nodiscard]] std::size_t size() const { return points_.size(); }
    [[nodiscard]] const std::vector<double>& points() const { return points_; }
    [[nodiscard]] const Vector& weights() const { return weights_; }
    [[nodiscard]] const Vector& sqrt_weights() const { return sqrt_weights_; }

    [[nodiscard]] bool operator==(const Grid& other) const { return points_ == other.points_; }

private:
    Grid(std::vector<double> pts, Vector w)
        : points_(std::move(pts)), weights_(std::move(w)), sqrt_weights_(weights_.cwiseSqrt()) {}

    std::vector<double> points_;
    Vector weights_;
    Vector sqrt_weights_;
};

[[nodiscard]] inline bool same_grid(const GridPtr& a, const GridPtr& b) {
    return a == b || (a && b && *a == *b);
}

inline void require_same_grid(const GridPtr& a, const GridPtr& b, const char* where) {
    if (!same_grid(a, b)) throw GridMismatch(where);
}

/// An element of L2[0,1] sampled on a grid.
class Curve {
public:
    Curve(GridPtr grid, Vector values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (!grid_) throw InvalidArgument("Curve: null grid");
        if (static_cast<std::size_t>(values_.size()) != grid_->size())
            throw LengthMismatch("Curve: values length does not match grid");
        if (!values_.allFinite()) throw InvalidArgument("Curve: non-finite value");
    }

    static Curve zero(const GridPtr& grid) {
        return {grid, Vector::Zero(static_cast<Eigen::Index>(grid->size()))};
    }
    static Curve constant(const GridPtr& grid, double c) {
        return {grid, Vector::Constant(static_cast<Eigen::Index>(grid->size()), c)};
    }
    template <class F>
    static Curve from_function(const GridPtr& grid, F&& f) {
        Vector v(static_cast<Eigen::Index>(grid->size()));
        for (std::size_t i = 0; i < grid->size(); ++i)
            v(static_cast<Eigen::Index>(i)) = f(grid->points()[i]);
        return {grid, std::move(v)};
    }

    [[nodiscard]] const GridPtr& grid() const { return grid_; }
    [[nodiscard]] const Vector& values() const { return values_; }
    [[nodiscard]] std::size_t size() const { return grid_->size(); }
    [[nodiscard]] double operator[](std::size_t i) const {
        return values_(static_cast<Eigen::Index>(i));
    }

    Curve& operator+=(const Curve& o) {
        require_same_grid(grid_, o.grid_, "Curve::operator+=");
        values_ += o.values_;
        return *this;
    }
    Curve& operator-=(const Curve& o) {
        require_same_grid(grid_, o.grid_, "Curve::operator-=");
        values_ -= o.values_;
        return *this;
    }
    Curve& operator*=(double c) {
        values_ *= c;
        return *this;
    }
    friend Curve operator+(Curve a, const Curve& b) { return a += b; }
    friend Curve operator-(Curve a, const Curve& b) { return a -= b; }
    friend Curve operator*(Curve a, double c) { return a *= c; }
    friend Curve operator*(double c, Curve a) { return a *= c; }

private:
    GridPtr grid_;
    Vector values_;
};

[[nodiscard]] inline double inner_product(const Curve& f, const Curve& g) {
    require_same_grid(f.grid(), g.grid(), "inner_product");
    const Vector& w = f.grid()->weights();
    return (w.array() * f.values().array() * g.values().array()).sum();
}

[[nodiscard]] inline double norm(const Curve& f) { return std::sqrt(std::max(0.0, inner_product(f, f))); }

/// Time-indexed curves on one grid, stored as a T x n row-major matrix.
class FunctionalSeries {
public:
    FunctionalSeries(GridPtr grid, RowMatrix values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (!grid_) throw InvalidArgument("FunctionalSeries: null grid");
        if (static_cast<std::size_t>(values_.cols()) != grid_->size())
            throw LengthMismatch("FunctionalSeries: column count does not match grid");
        if (values_.rows() < 2) throw InvalidArgument("FunctionalSeries: need at least 2 periods");
        if (!values_.allFinite()) throw InvalidArgument("FunctionalSeries: non-finite value");
    }

    static FunctionalSeries from_curves(const std::vector<Curve>& curves) {
        if (curves.empty()) throw InvalidArgument("FunctionalSeries: no curves");
        const GridPtr& g = curves.front().grid();
        RowMatrix m(static_cast<Eigen::Index>(curves.size()), static_cast<Eigen::Index>(g->size()));
        for (std::size_t t = 0; t < curves.size(); ++t) {
            require_same_grid(g, curves[t].grid(), "FunctionalSeries::from_curves");
            m.row(static_cast<Eigen::Index>(t)) = curves[t].values().transpose();
        }
        return {g, std::move(m)};
    }

    [[nodiscard]] std::size_t length() const { return static_cast<std::size_t>(values_.rows()); }
    [[nodiscard]] const GridPtr& grid() const { return grid_; }
    [[nodiscard]] const RowMatrix& values() const { return values_; }
    [[nodiscard]] Curve curve(std::size_t t) const {
        return {grid_, values_.row(static_cast<Eigen::Index>(t)).transpose()};
    }
    /// Sample mean curve.
    [[nodiscard]] Curve mean() const { return {grid_, values_.colwise().mean().transpose()}; }
    /// <X_t, f> for every t.
    [[nodiscard]] Vector project(const Curve& f) const {
        require_same_grid(grid_, f.grid(), "FunctionalSeries::project");
        return values_ * grid_->weights().cwiseProduct(f.values());
    }

private:
    GridPtr grid_;
    RowMatrix values_;
};

class ScalarSeries {
public:
    explicit ScalarSeries(Vector values) : values_(std::move(values)) {
        if (!values_.allFinite()) throw InvalidArgument("ScalarSeries: non-finite value");
    }
    ScalarSeries(std::initializer_list<double> v)
        : ScalarSeries(Vector(Eigen::Map<const Vector>(v.begin(), static_cast<Eigen::Index>(v.size())))) {}

    [[nodiscard]] std::size_t length() const { return static_cast<std::size_t>(values_.size()); }
    [[nodiscard]] const Vector& values() const { return values_; }
    [[nodiscard]] double operator[](std::size_t t) const { return values_(static_cast<Eigen::Index>(t)); }

private:
    Vector values_;
};

/// Linear operator on grid space, represented by its kernel matrix.
class HilbertOperator {
public:
    HilbertOperator(GridPtr grid, Matrix kernel) : grid_(std::move(grid)), kernel_(std::move(kernel)) {
        if (!grid_) throw InvalidArgument("HilbertOperator: null grid");
        const auto n = static_cast<Eigen::Index>(grid_->size());
        if (kernel_.rows() != n || kernel_.cols() != n)
            throw LengthMismatch("HilbertOperator: kernel must be n x n");
        if (!kernel_.allFinite()) throw InvalidArgument("HilbertOperator: non-finite entry");
    }

    static HilbertOperator zero(const GridPtr& grid) {
        const auto n = static_cast<Eigen::Index>(grid->size());
        return {grid, Matrix::Zero(n, n)};
    }
    /// Kernel diag(1/w): acts as the identity under quadrature.
    static HilbertOperator identity(const GridPtr& grid) {
        return {grid, Matrix(grid->weights().cwiseInverse().asDiagonal())};
    }

    [[nodiscard]] const GridPtr& grid() const { return grid_; }
    [[nodiscard]] const Matrix& kernel() const { return kernel_; }

    [[nodiscard]] HilbertOperator symmetrized() const {
        return {grid_, 0.5 * (kernel_ + kernel_.transpose())};
    }
    [[nodiscard]] double max_asymmetry() const { return (kernel_ - kernel_.transpose()).cwiseAbs().maxCoeff(); }
    /// Quadrature trace: sum_i w_i K(s_i, s_i).
    [[nodiscard]] double trace() const { return grid_->weights().dot(kernel_.diagonal()); }
    /// Hilbert-Schmidt norm under quadrature.
    [[nodiscard]] double hs_norm() const {
        const Vector& w = grid_->weights();
        return std::sqrt((w.asDiagonal() * kernel_.cwiseAbs2() * w).sum());
    }

    HilbertOperator& operator+=(const HilbertOperator& o) {
        require_same_grid(grid_, o.grid_, "HilbertOperator::operator+=");
        kernel_ += o.kernel_;
        return *this;
    }
    HilbertOperator& operator*=(double c) {
        kernel_ *= c;
        return *this;
    }
    friend HilbertOperator operator+(HilbertOperator a, const HilbertOperator& b) { return a += b; }
    friend HilbertOperator operator-(HilbertOperator a, const HilbertOperator& b) {
        return a += (-1.0) * b;
    }
    friend HilbertOperator operator*(double c, HilbertOperator a) { return a *= c; }

private:
    GridPtr grid_;
    Matrix kernel_;
};

/// f (x) g, the map u -> <f,u> g.
[[nodiscard]] inline HilbertOperator outer(const Curve& f, const Curve& g) {
    require_same_grid(f.grid(), g.grid(), "outer");
    return {f.grid(), g.values() * f.values().transpose()};
}

[[nodiscard]] inline Curve apply(const HilbertOperator& A, const Curve& v) {
    require_same_grid(A.grid(), v.grid(), "apply");
    return {v.grid(), A.kernel() * A.grid()->weights().cwiseProduct(v.values())};
}

/// Standard Fourier basis: f_1 = 1, f_{2k} = sqrt2 sin(2 pi k x), f_{2k+1} = sqrt2 cos(2 pi k x).
[[nodiscard]] inline double fourier_value(std::size_t j, double x) {
    if (j == 0) throw InvalidArgument("fourier_basis: index starts at 1");
    if (j == 1) return 1.0;
    const double k = static_cast<double>(j / 2);
    const double arg = 2.0 * std::numbers::pi * k * x;
    return std::numbers::sqrt2 * ((j % 2 == 0) ? std::sin(arg) : std::cos(arg));
}

[[nodiscard]] inline Curve fourier_basis(std::size_t j, const GridPtr& grid) {
    if (j == 0) throw InvalidArgument("fourier_basis: index starts at 1");
    return Curve::from_function(grid, [j](double x) { return fourier_value(j, x); });
}

/// n x J matrix whose column j-1 samples f_j on the grid.
[[nodiscard]] inline Matrix fourier_matrix(std::size_t J, const GridPtr& grid) {
    Matrix F(static_cast<Eigen::Index>(grid->size()), static_cast<Eigen::Index>(J));
    for (std::size_t j = 1; j <= J; ++j)
        for (std::size_t i = 0; i < grid->size(); ++i)
            F(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j - 1)) = fourier_value(j, grid->points()[i]);
    return F;
}

struct EigenPairs {
    std::vector<double> values;  ///< descending
    std::vector<Curve> vectors;  ///< quadrature-orthonormal; empty if not requested
};

namespace detail {

// Similarity transform W^{1/2} K W^{1/2}, symmetrized.
inline Matrix weighted_symmetric(const HilbertOperator& A) {
    const Vector& sw = A.grid()->sqrt_weights();
    Matrix B = sw.asDiagonal() * A.kernel() * sw.asDiagonal();
    return 0.5 * (B + B.transpose());
}

inline std::vector<Eigen::Index> descending_order(const Vector& ascending) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(ascending.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return ascending(a) > ascending(b); });
    return idx;
}

}  // namespace detail

/// Eigendecomposition of the symmetrized operator. Solves K W v = lambda v
/// through the symmetric matrix W^{1/2} K W^{1/2}.
[[nodiscard]] inline EigenPairs sym_eig(const HilbertOperator& A, bool with_vectors = true) {
    const Matrix B = detail::weighted_symmetric(A);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(
        B, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw Error("sym_eig: eigensolver failed");
    const auto order = detail::descending_order(solver.eigenvalues());
    EigenPairs out;
    out.values.reserve(order.size());
    for (auto i : order) out.values.push_back(solver.eigenvalues()(i));
    if (with_vectors) {
        const Vector inv_sw = A.grid()->sqrt_weights().cwiseInverse();
        out.vectors.reserve(order.size());
        for (auto i : order)
            out.vectors.emplace_back(A.grid(), inv_sw.cwiseProduct(solver.eigenvectors().col(i)));
    }
    return out;
}

}  // namespace funflir
