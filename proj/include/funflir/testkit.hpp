#pragma once

// End-to-end test: null residuals -> moment process -> long-run covariance
// -> truncated spectrum -> statistic, Monte Carlo critical value and p-value.

#include "funflir/critical_values.hpp"
#include "funflir/errors.hpp"
#include "funflir/hilbert.hpp"
#include "funflir/lrv.hpp"
#include "funflir/moment_process.hpp"
#include "funflir/weights.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace funflir {

enum class Variant { Plain, Intercept, ScalarCovariates, MultiFunctional, ExogeneityBenchmark };

[[nodiscard]] inline std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Plain: return "plain";
        case Variant::Intercept: return "intercept";
        case Variant::ScalarCovariates: return "covariates";
        case Variant::MultiFunctional: return "multi";
        case Variant::ExogeneityBenchmark: return "exogeneity";
    }
    return "unknown";
}

[[nodiscard]] inline Variant variant_from_name(std::string_view s) {
    if (s == "plain") return Variant::Plain;
    if (s == "intercept") return Variant::Intercept;
    if (s == "covariates" || s == "scalar-covariates") return Variant::ScalarCovariates;
    if (s == "multi" || s == "multi-functional") return Variant::MultiFunctional;
    if (s == "exogeneity" || s == "benchmark") return Variant::ExogeneityBenchmark;
    throw InvalidArgument("unknown variant '" + std::string(s) + "'");
}

struct TestConfig {
    Variant variant = Variant::Plain;
    WeightSpec weight = WeightSpec::endpoint();
    KernelSpec kernel = KernelSpec::bartlett();
    double alpha = 0.05;
    std::optional<std::size_t> d_T;        ///< nullopt: 5 + ceil(T^0.333)
    std::optional<double> bandwidth;       ///< nullopt: Andrews on the leading FPCA scores
    std::size_t n_scores = kAndrewsScores;
    std::size_t mc_draws = 1000;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("TestConfig: alpha must lie in (0,1)");
        if (mc_draws < 100) throw InvalidArgument("TestConfig: mc_draws must be at least 100");
        if (d_T && *d_T < 1) throw InvalidArgument("TestConfig: d_T must be at least 1");
        if (bandwidth && !(*bandwidth > 0.0)) throw InvalidArgument("TestConfig: bandwidth must be positive");
        if (n_scores < 1) throw InvalidArgument("TestConfig: n_scores must be at least 1");
    }
};

struct TestInputs {
    std::optional<FunctionalSeries> Z;       ///< ignored by ExogeneityBenchmark
    ScalarSeries y;
    std::vector<FunctionalSeries> Xs;        ///< one regressor except for MultiFunctional
    std::vector<Curve> theta0s;
    std::vector<ScalarSeries> covariates;    ///< ScalarCovariates only
};

struct TestResult {
    double statistic = 0.0;
    double critical_value = 0.0;
    double p_value = 1.0;
    bool reject = false;
    std::vector<double> eigenvalues;
    double bandwidth = 0.0;
    std::size_t d_T = 0;
    std::size_t T = 0;
    double alpha = 0.05;
    std::size_t mc_draws = 0;
    std::uint64_t seed = 0;
    std::string variant;
    std::string kernel;
    std::string weight;
    double drift_factor = 0.0;
    double andrews_alpha = 0.0;
    bool degenerate_spectrum = false;
    bool fpca_rank_deficient = false;
    bool spectrum_padded = false;
    bool spectrum_clipped = false;
};

/// The moment process of the chosen variant together with the product series
/// T * (S(t/T) - S((t-1)/T)) that feeds the long-run covariance estimate.
struct PreparedMoments {
    MomentProcess process;
    FunctionalSeries lrv_input;
};

namespace detail {

inline const FunctionalSeries& single_regressor(const TestInputs& in) {
    if (in.Xs.size() != 1 || in.theta0s.size() != 1)
        throw InvalidArgument("run_test: this variant takes exactly one regressor and one null slope");
    return in.Xs.front();
}

inline PreparedMoments from_products(const GridPtr& grid, RowMatrix products) {
    auto process = MomentProcess::from_products(grid, products);
    return {std::move(process), FunctionalSeries(grid, std::move(products))};
}

}  // namespace detail

[[nodiscard]] inline PreparedMoments prepare_moments(Variant variant, const TestInputs& in) {
    const auto need_z = [&]() -> const FunctionalSeries& {
        if (!in.Z) throw InvalidArgument("run_test: auxiliary series Z is required for this variant");
        if (in.Z->length() != in.y.length()) throw LengthMismatch("run_test: Z and y lengths differ");
        return *in.Z;
    };
    switch (variant) {
        case Variant::Plain: {
            const auto& X = detail::single_regressor(in);
            const auto& Z = need_z();
            const Vector u0 = null_residuals(in.y, X, in.theta0s.front());
            return detail::from_products(Z.grid(), detail::scale_rows(Z.values(), u0));
        }
        case Variant::ExogeneityBenchmark: {
            const auto& X = detail::single_regressor(in);
            const Vector u0 = null_residuals(in.y, X, in.theta0s.front());
            return detail::from_products(X.grid(), detail::scale_rows(X.values(), u0));
        }
        case Variant::Intercept: {
            const auto& X = detail::single_regressor(in);
            const auto& Z = need_z();
            Vector u0 = null_residuals(in.y, X, in.theta0s.front());
            u0.array() -= u0.mean();
            return detail::from_products(Z.grid(), detail::scale_rows(detail::demeaned(Z.values()), u0));
        }
        case Variant::ScalarCovariates: {
            const auto& X = detail::single_regressor(in);
            const auto& Z = need_z();
            if (in.covariates.empty()) return prepare_moments(Variant::Plain, in);
            const auto zr = residualize_scalar(Z, in.covariates);
            const auto yr = residualize_scalar(in.y, in.covariates);
            const auto xr = residualize_scalar(X, in.covariates);
            const Vector u0 = null_residuals(yr.residuals, xr.residuals, in.theta0s.front());
            return detail::from_products(Z.grid(), detail::scale_rows(zr.residuals.values(), u0));
        }
        case Variant::MultiFunctional: {
            const auto& Z = need_z();
            const Vector u0 = multi_null_residuals(in.y, in.Xs, in.theta0s);
            return detail::from_products(Z.grid(), detail::scale_rows(Z.values(), u0));
        }
    }
    throw InvalidArgument("run_test: unknown variant");
}

/// Estimated spectrum and the simulated null law built from it. The null law
/// does not depend on the weight, so one calibration serves every weight.
struct Calibration {
    LrvEstimate lrv;
    std::optional<WeightedChiSq> null_law;  ///< empty when the spectrum is degenerate
};

[[nodiscard]] inline Calibration calibrate(const FunctionalSeries& lrv_input, const TestConfig& config) {
    config.validate();
    const std::size_t d_T = config.d_T.value_or(default_dT(lrv_input.length()));
    LrvEstimate lrv = estimate_lrv(lrv_input, config.kernel, config.bandwidth, d_T, false, config.n_scores);
    std::optional<WeightedChiSq> law;
    try {
        law.emplace(lrv.eigenvalues, config.mc_draws, config.seed);
    } catch (const DegenerateSpectrum&) {
    }
    return {std::move(lrv), std::move(law)};
}

/// Statistic for `weight` against an existing calibration. A degenerate
/// spectrum is only accepted when the statistic is exactly zero (the process
/// vanishes identically); otherwise DegenerateSpectrum is thrown.
[[nodiscard]] inline TestResult decide(const TestConfig& config, const WeightSpec& weight,
                                       const MomentProcess& process, const Calibration& cal) {
    TestResult r;
    r.statistic = statistic(weight, process);
    r.eigenvalues = cal.lrv.eigenvalues;
    r.bandwidth = cal.lrv.bandwidth;
    r.d_T = cal.lrv.d_T;
    r.T = process.T();
    r.alpha = config.alpha;
    r.mc_draws = config.mc_draws;
    r.seed = config.seed;
    r.variant = variant_name(config.variant);
    r.kernel = config.kernel.name();
    r.weight = weight.name();
    r.drift_factor = weight.drift_factor();
    r.andrews_alpha = cal.lrv.andrews.alpha;
    r.fpca_rank_deficient = cal.lrv.fpca_rank_deficient;
    r.spectrum_padded = cal.lrv.padded;
    r.spectrum_clipped = cal.lrv.clipped;
    if (!cal.null_law) {
        if (r.statistic != 0.0)
            throw DegenerateSpectrum("run_test: estimated long-run covariance has no positive eigenvalue");
        r.degenerate_spectrum = true;
        r.critical_value = 0.0;
        r.p_value = 1.0;
        r.reject = false;
        return r;
    }
    r.critical_value = cal.null_law->quantile(config.alpha);
    r.p_value = cal.null_law->pvalue(r.statistic);
    r.reject = r.statistic > r.critical_value;
    return r;
}

[[nodiscard]] inline TestResult run_test(const TestConfig& config, const TestInputs& inputs) {
    config.validate();
    const PreparedMoments prep = prepare_moments(config.variant, inputs);
    const Calibration cal = calibrate(prep.lrv_input, config);
    return decide(config, config.weight, prep.process, cal);
}

/// Single-regressor convenience overload (Plain, Intercept, ExogeneityBenchmark,
/// or ScalarCovariates when `covariates` is non-empty).
[[nodiscard]] inline TestResult run_test(const TestConfig& config, const FunctionalSeries& Z, const ScalarSeries& y,
                                         const FunctionalSeries& X, const Curve& theta0,
                                         std::vector<ScalarSeries> covariates = {}) {
    return run_test(config, TestInputs{Z, y, {X}, {theta0}, std::move(covariates)});
}

[[nodiscard]] inline TestResult run_test(const TestConfig& config, const FunctionalSeries& Z, const ScalarSeries& y,
                                         const std::vector<FunctionalSeries>& Xs, const std::vector<Curve>& theta0s) {
    return run_test(config, TestInputs{Z, y, Xs, theta0s, {}});
}

/// Test of zero functional correlation between y and the (possibly
/// mismeasured) X, as the intercept-model test of theta = 0 with auxiliary Z.
[[nodiscard]] inline TestResult correlation_test(TestConfig config, const ScalarSeries& y,
                                                 const FunctionalSeries& X_observed, const FunctionalSeries& Z) {
    config.variant = Variant::Intercept;
    return run_test(config, Z, y, X_observed, Curve::zero(X_observed.grid()));
}

}  // namespace funflir
