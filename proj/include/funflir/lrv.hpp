#pragma once

// Kernel estimation of the long-run covariance operator of a functional
// series, FPCA scores, automatic bandwidth and eigenvalue truncation.

#include "funflir/errors.hpp"
#include "funflir/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace funflir {

enum class KernelFamily { Bartlett, Parzen, TukeyHanning };

struct KernelSpec {
    KernelFamily family = KernelFamily::Bartlett;
    double support = 1.0;     ///< k(x) = 0 for |x| > support
    double smoothness = 1.0;  ///< order of 1 - k(x) near 0

    static KernelSpec bartlett() { return {KernelFamily::Bartlett, 1.0, 1.0}; }
    static KernelSpec parzen() { return {KernelFamily::Parzen, 1.0, 2.0}; }
    static KernelSpec tukey_hanning() { return {KernelFamily::TukeyHanning, 1.0, 2.0}; }

    static KernelSpec from_name(std::string_view name) {
        if (name == "bartlett") return bartlett();
        if (name == "parzen") return parzen();
        if (name == "tukey-hanning" || name == "tukey_hanning" || name == "th") return tukey_hanning();
        throw InvalidArgument("unknown kernel '" + std::string(name) + "'");
    }

    [[nodiscard]] std::string name() const {
        switch (family) {
            case KernelFamily::Bartlett: return "bartlett";
            case KernelFamily::Parzen: return "parzen";
            case KernelFamily::TukeyHanning: return "tukey-hanning";
        }
        return "unknown";
    }
};

[[nodiscard]] inline double kernel_value(const KernelSpec& spec, double x) {
    const double a = std::abs(x);
    switch (spec.family) {
        case KernelFamily::Bartlett:
            return a <= 1.0 ? 1.0 - a : 0.0;
        case KernelFamily::Parzen:
            if (a <= 0.5) return 1.0 - 6.0 * a * a + 6.0 * a * a * a;
            if (a <= 1.0) return 2.0 * (1.0 - a) * (1.0 - a) * (1.0 - a);
            return 0.0;
        case KernelFamily::TukeyHanning:
            return a <= 1.0 ? 0.5 * (1.0 + std::cos(std::numbers::pi * a)) : 0.0;
    }
    return 0.0;
}

/// (1/T) sum_{|s| <= h} k(s/h) Gamma_s with Gamma_s built from the
/// full-sample-demeaned series. The caller passes the product series
/// v_t = Z_t u_{0,t}. Output is symmetrized.
[[nodiscard]] inline HilbertOperator sample_lrv(const FunctionalSeries& v, double h, const KernelSpec& spec) {
    if (!(h > 0.0)) throw InvalidArgument("sample_lrv: bandwidth must be positive");
    const auto T = static_cast<Eigen::Index>(v.length());
    if (T < 4) throw InvalidArgument("sample_lrv: need at least 4 periods");
    const RowMatrix D = v.values().rowwise() - v.values().colwise().mean();
    const auto max_lag =
        std::min<Eigen::Index>(T - 1, static_cast<Eigen::Index>(std::floor(h * spec.support)));

    // L_t = sum_{s=1..max_lag} k(s/h) D_{t-s}; then sum_{s>=1} k_s Gamma_s = D' L.
    Matrix kernel = D.transpose() * D;
    if (max_lag >= 1) {
        RowMatrix L = RowMatrix::Zero(T, D.cols());
        for (Eigen::Index s = 1; s <= max_lag; ++s) {
            const double ks = kernel_value(spec, static_cast<double>(s) / h);
            if (ks == 0.0) continue;
            L.bottomRows(T - s).noalias() += ks * D.topRows(T - s);
        }
        const Matrix cross = D.transpose() * L;
        kernel += cross + cross.transpose();
    }
    kernel /= static_cast<double>(T);
    return HilbertOperator(v.grid(), 0.5 * (kernel + kernel.transpose()));
}

struct FpcaScores {
    Matrix scores;                   ///< T x n
    std::vector<double> variances;   ///< eigenvalues of the sample covariance
    std::vector<Curve> components;   ///< eigenfunctions actually used
    bool rank_deficient = false;     ///< some requested components were zero-filled
};

/// Scores of the demeaned series on the top-n eigenfunctions of its sample
/// covariance. Components with (numerically) zero variance give zero scores.
[[nodiscard]] inline FpcaScores fpca_scores(const FunctionalSeries& series, std::size_t n) {
    const auto T = static_cast<Eigen::Index>(series.length());
    FpcaScores out;
    out.scores = Matrix::Zero(T, static_cast<Eigen::Index>(n));
    if (n == 0) return out;
    if (n > series.length()) throw InvalidArgument("fpca_scores: more components than periods");
    const RowMatrix D = series.values().rowwise() - series.values().colwise().mean();
    const HilbertOperator cov(series.grid(), (D.transpose() * D) / static_cast<double>(T));
    const EigenPairs eig = sym_eig(cov, true);
    const double top = eig.values.empty() ? 0.0 : std::max(0.0, eig.values.front());
    const Vector& w = series.grid()->weights();
    for (std::size_t j = 0; j < n; ++j) {
        if (j >= eig.values.size() || !(eig.values[j] > 1e-12 * top) || top == 0.0) {
            out.rank_deficient = true;
            continue;
        }
        out.variances.push_back(eig.values[j]);
        out.components.push_back(eig.vectors[j]);
        out.scores.col(static_cast<Eigen::Index>(j)) = D * w.cwiseProduct(eig.vectors[j].values());
    }
    return out;
}

struct AndrewsFit {
    double bandwidth = 1.0;
    double alpha = 0.0;             ///< alpha(1) for Bartlett, alpha(2) otherwise
    std::vector<double> rho;        ///< per-score AR(1) coefficient
    std::vector<double> sigma2;     ///< per-score innovation variance
};

namespace detail {

inline constexpr double kMaxAbsRho = 0.99;

inline void ar1_fit(const Vector& x, double& rho, double& sigma2) {
    const auto T = x.size();
    const double den = x.head(T - 1).squaredNorm();
    if (!(den > 0.0)) {
        rho = 0.0;
        sigma2 = 0.0;
        return;
    }
    rho = std::clamp(x.tail(T - 1).dot(x.head(T - 1)) / den, -kMaxAbsRho, kMaxAbsRho);
    const Vector e = x.tail(T - 1) - rho * x.head(T - 1);
    sigma2 = e.squaredNorm() / static_cast<double>(T - 1);
}

}  // namespace detail

/// Andrews' AR(1) plug-in bandwidth with unit weights across score series.
[[nodiscard]] inline AndrewsFit andrews_fit(const Matrix& scores, const KernelSpec& spec) {
    if (scores.cols() < 1) throw InvalidArgument("andrews_bandwidth: need at least one score series");
    if (scores.rows() < 3) throw InvalidArgument("andrews_bandwidth: need at least 3 periods");
    AndrewsFit fit;
    double num = 0.0, den = 0.0;
    const bool first_order = spec.family == KernelFamily::Bartlett;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
        double rho = 0.0, s2 = 0.0;
        detail::ar1_fit(scores.col(j), rho, s2);
        fit.rho.push_back(rho);
        fit.sigma2.push_back(s2);
        const double s4 = s2 * s2;
        const double om = 1.0 - rho;
        num += first_order ? 4.0 * rho * rho * s4 / (std::pow(om, 6) * (1.0 + rho) * (1.0 + rho))
                           : 4.0 * rho * rho * s4 / std::pow(om, 8);
        den += s4 / std::pow(om, 4);
    }
    fit.alpha = den > 0.0 ? num / den : 0.0;
    const double T = static_cast<double>(scores.rows());
    double h = 0.0;
    switch (spec.family) {
        case KernelFamily::Bartlett: h = 1.1447 * std::cbrt(fit.alpha * T); break;
        case KernelFamily::Parzen: h = 2.6614 * std::pow(fit.alpha * T, 0.2); break;
        case KernelFamily::TukeyHanning: h = 1.7462 * std::pow(fit.alpha * T, 0.2); break;
    }
    fit.bandwidth = std::max(1.0, h);
    return fit;
}

[[nodiscard]] inline double andrews_bandwidth(const Matrix& scores, const KernelSpec& spec) {
    return andrews_fit(scores, spec).bandwidth;
}

/// 5 + ceil(T^0.333).
[[nodiscard]] inline std::size_t default_dT(std::size_t T) {
    if (T < 2) throw InvalidArgument("default_dT: T must be at least 2");
    return 5 + static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(T), 0.333)));
}

struct TruncatedSpectrum {
    std::vector<double> values;   ///< length d_T, nonincreasing, >= 0
    std::vector<Curve> vectors;   ///< up to min(d_T, n) eigenfunctions when requested
    bool padded = false;          ///< d_T exceeded the grid size
    bool clipped = false;         ///< some retained eigenvalue was negative
};

/// Top-d_T eigenpairs with negative eigenvalues set to zero.
[[nodiscard]] inline TruncatedSpectrum truncated_eigs(const HilbertOperator& A, std::size_t d_T,
                                                      bool with_vectors = true) {
    if (d_T < 1) throw InvalidArgument("truncated_eigs: d_T must be at least 1");
    EigenPairs eig = sym_eig(A, with_vectors);
    TruncatedSpectrum out;
    out.values.assign(d_T, 0.0);
    for (std::size_t j = 0; j < d_T && j < eig.values.size(); ++j) {
        if (eig.values[j] < 0.0) out.clipped = true;
        out.values[j] = std::max(0.0, eig.values[j]);
        if (with_vectors) out.vectors.push_back(eig.vectors[j]);
    }
    out.padded = d_T > eig.values.size();
    return out;
}

struct LrvEstimate {
    HilbertOperator op;
    double bandwidth;
    std::vector<double> eigenvalues;
    std::vector<Curve> eigenvectors;
    std::size_t d_T;
    AndrewsFit andrews;           ///< populated when the bandwidth was automatic
    bool fpca_rank_deficient = false;
    bool padded = false;
    bool clipped = false;
};

/// Number of FPCA scores used for automatic bandwidth selection.
inline constexpr std::size_t kAndrewsScores = 5;

/// Full estimation path: bandwidth (explicit, or Andrews on the leading FPCA
/// scores of v), kernel estimate, truncated spectrum.
[[nodiscard]] inline LrvEstimate estimate_lrv(const FunctionalSeries& v, const KernelSpec& spec,
                                              std::optional<double> bandwidth, std::size_t d_T,
                                              bool with_vectors = false, std::size_t n_scores = kAndrewsScores) {
    AndrewsFit fit;
    bool deficient = false;
    double h = 0.0;
    if (bandwidth) {
        h = *bandwidth;
    } else {
        const auto scores = fpca_scores(v, std::min(n_scores, v.length()));
        deficient = scores.rank_deficient;
        fit = andrews_fit(scores.scores, spec);
        h = fit.bandwidth;
    }
    HilbertOperator op = sample_lrv(v, h, spec);
    auto spectrum = truncated_eigs(op, d_T, with_vectors);
    return {std::move(op), h, std::move(spectrum.values), std::move(spectrum.vectors), d_T, std::move(fit),
            deficient, spectrum.padded, spectrum.clipped};
}

}  // namespace funflir
