#pragma once

// Monte Carlo calibration of the weighted chi-square law sum_j lambda_j nu_j^2
// and of its shifted (local alternative) counterpart.

#include "funflir/errors.hpp"
#include "funflir/hilbert.hpp"
#include "funflir/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace funflir {

/// Eigenvalues at or below this are treated as zero.
inline constexpr double kSpectrumFloor = 1e-14;

namespace detail {

inline void require_draws(std::size_t draws) {
    if (draws < 1) throw InvalidArgument("Monte Carlo: draws must be at least 1");
}

inline void require_calibratable(std::span<const double> lambdas) {
    for (double l : lambdas)
        if (l < 0.0 || !std::isfinite(l)) throw InvalidArgument("weighted chi-square: lambdas must be finite and >= 0");
    const bool any = std::any_of(lambdas.begin(), lambdas.end(), [](double l) { return l > kSpectrumFloor; });
    if (!any) throw DegenerateSpectrum("weighted chi-square: every eigenvalue is zero; the test cannot be calibrated");
}

// Draws sum_j (sqrt(lambda_j) nu_j + delta_j)^2. Normals are generated
// component by component, so a longer spectrum reuses the same nu_j for the
// leading components under a fixed seed.
inline std::vector<double> shifted_draws(std::span<const double> lambdas, std::span<const double> deltas,
                                         std::size_t draws, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> out(draws, 0.0);
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
        const double sl = std::sqrt(std::max(0.0, lambdas[j]));
        const double d = deltas.empty() ? 0.0 : deltas[j];
        for (auto& x : out) {
            const double z = sl * normal(rng) + d;
            x += z * z;
        }
    }
    return out;
}

}  // namespace detail

/// Empirical (1 - alpha)-quantile: the ceil((1 - alpha) n)-th order statistic.
[[nodiscard]] inline double empirical_quantile(std::vector<double> sample, double alpha) {
    if (sample.empty()) throw InvalidArgument("empirical_quantile: empty sample");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("empirical_quantile: alpha must lie in (0,1)");
    const auto n = sample.size();
    auto k = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(n) - 1e-9));
    k = std::clamp<std::size_t>(k, 1, n);
    std::nth_element(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(k - 1), sample.end());
    return sample[k - 1];
}

/// The simulated null law sum_j lambda_j nu_j^2, kept sorted so that a
/// quantile and a p-value can be read off the same draws.
class WeightedChiSq {
public:
    WeightedChiSq(std::vector<double> lambdas, std::size_t draws, std::uint64_t seed)
        : lambdas_(std::move(lambdas)), seed_(seed) {
        detail::require_draws(draws);
        detail::require_calibratable(lambdas_);
        sample_ = detail::shifted_draws(lambdas_, {}, draws, seed_);
        std::sort(sample_.begin(), sample_.end());
    }

    [[nodiscard]] const std::vector<double>& lambdas() const { return lambdas_; }
    [[nodiscard]] const std::vector<double>& sorted_sample() const { return sample_; }
    [[nodiscard]] std::size_t draws() const { return sample_.size(); }
    [[nodiscard]] std::uint64_t seed() const { return seed_; }

    [[nodiscard]] double quantile(double alpha) const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("mc_quantile: alpha must lie in (0,1)");
        const auto n = sample_.size();
        auto k = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(n) - 1e-9));
        k = std::clamp<std::size_t>(k, 1, n);
        return sample_[k - 1];
    }

    /// (r + 1)/(n + 1) with r the number of draws at or above `stat`.
    [[nodiscard]] double pvalue(double stat) const {
        const auto it = std::lower_bound(sample_.begin(), sample_.end(), stat);
        const auto r = static_cast<double>(sample_.end() - it);
        return (r + 1.0) / (static_cast<double>(sample_.size()) + 1.0);
    }

private:
    std::vector<double> lambdas_;
    std::uint64_t seed_;
    std::vector<double> sample_;
};

[[nodiscard]] inline double mc_quantile(const std::vector<double>& lambdas, double alpha, std::size_t draws,
                                        std::uint64_t seed) {
    return WeightedChiSq(lambdas, draws, seed).quantile(alpha);
}

[[nodiscard]] inline double mc_pvalue(const std::vector<double>& lambdas, double stat, std::size_t draws,
                                      std::uint64_t seed) {
    return WeightedChiSq(lambdas, draws, seed).pvalue(stat);
}

/// Draws of sum_j (sqrt(lambda_j) nu_j + <shift, v_j>)^2.
[[nodiscard]] inline std::vector<double> local_limit_draws(const std::vector<double>& lambdas,
                                                           const std::vector<Curve>& eigvecs, const Curve& shift,
                                                           std::size_t draws, std::uint64_t seed) {
    detail::require_draws(draws);
    if (eigvecs.size() != lambdas.size())
        throw LengthMismatch("local_limit_draws: need one eigenfunction per eigenvalue");
    std::vector<double> deltas;
    deltas.reserve(eigvecs.size());
    for (const auto& v : eigvecs) deltas.push_back(inner_product(shift, v));
    return detail::shifted_draws(lambdas, deltas, draws, seed);
}

/// P(local limit > q_alpha), with q_alpha and the shifted draws taken from
/// independent child streams of `seed`.
[[nodiscard]] inline double local_power(const std::vector<double>& lambdas, const std::vector<Curve>& eigvecs,
                                        const Curve& shift, double alpha, std::size_t draws, std::uint64_t seed) {
    const double q = mc_quantile(lambdas, alpha, draws, derive_seed(seed, {0}));
    const auto sample = local_limit_draws(lambdas, eigvecs, shift, draws, derive_seed(seed, {1}));
    const auto above = std::count_if(sample.begin(), sample.end(), [q](double x) { return x > q; });
    return static_cast<double>(above) / static_cast<double>(sample.size());
}

}  // namespace funflir
