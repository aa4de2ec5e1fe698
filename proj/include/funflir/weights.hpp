#pragma once

// Weighted linear functionals g_w(f) = C_w * int f(r) w(r) mu(dr) of a
// moment process, with the normalizer C_w and the drift factor D_w.

#include "funflir/errors.hpp"
#include "funflir/hilbert.hpp"
#include "funflir/moment_process.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace funflir {

enum class Measure { Lebesgue, DiscretePartition, DiracAtOne };

class WeightSpec {
public:
    using WeightFn = std::function<double(double)>;

    /// Number of quadrature points for the Lebesgue integrals in C_w and D_w.
    static constexpr std::size_t kQuadraturePoints = 100001;

    /// w(r) = r^p with Lebesgue measure.
    static WeightSpec power(double p) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("WeightSpec::power: p must be finite and >= 0");
        std::ostringstream name;
        name << "p=" << p;
        return WeightSpec(Measure::Lebesgue, [p](double r) { return p == 0.0 ? 1.0 : std::pow(r, p); }, name.str(), {});
    }

    static WeightSpec constant(double c = 1.0) {
        auto w = lebesgue([c](double) { return c; }, "constant");
        return w;
    }

    /// Endpoint evaluation g(f) = f(1): Dirac measure at 1 with w = 1.
    static WeightSpec endpoint() { return WeightSpec(Measure::DiracAtOne, [](double) { return 1.0; }, "endpoint", {}); }

    static WeightSpec lebesgue(WeightFn w, std::string name) {
        return WeightSpec(Measure::Lebesgue, std::move(w), std::move(name), {});
    }

    /// Discrete measure sum_k (r_k - r_{k-1}) delta_{r_k} with r_0 = 0 and r_N = 1.
    static WeightSpec discrete(std::vector<double> points, WeightFn w, std::string name) {
        if (points.empty() || std::abs(points.back() - 1.0) > 1e-12)
            throw InvalidArgument("WeightSpec::discrete: partition must end at 1");
        double prev = 0.0;
        for (double r : points) {
            if (!(r > prev)) throw InvalidArgument("WeightSpec::discrete: partition must be increasing in (0,1]");
            prev = r;
        }
        points.back() = 1.0;
        return WeightSpec(Measure::DiscretePartition, std::move(w), std::move(name), std::move(points));
    }

    /// Same measure with weight c*w. Leaves g_w unchanged.
    [[nodiscard]] WeightSpec scaled(double c) const {
        if (!(c > 0.0)) throw InvalidArgument("WeightSpec::scaled: factor must be positive");
        WeightFn base = weight_;
        std::ostringstream name;
        name << c << "*" << name_;
        WeightSpec out(measure_, [base, c](double r) { return c * base(r); }, name.str(), partition_);
        out.normalizer_ = normalizer_ / c;
        out.drift_integral_ = drift_integral_ * c;
        return out;
    }

    [[nodiscard]] Measure measure() const { return measure_; }
    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] double weight(double r) const { return weight_(r); }
    [[nodiscard]] const std::vector<double>& partition() const { return partition_; }

    /// C_w, computed once at construction.
    [[nodiscard]] double normalizer() const { return normalizer_; }
    /// B_w = int r w(r) mu(dr).
    [[nodiscard]] double drift_integral() const { return drift_integral_; }
    [[nodiscard]] double drift_factor() const { return normalizer_ * drift_integral_; }

private:
    WeightSpec(Measure m, WeightFn w, std::string name, std::vector<double> partition)
        : measure_(m), weight_(std::move(w)), name_(std::move(name)), partition_(std::move(partition)) {
        validate_and_integrate();
    }

    void validate_and_integrate() {
        double tail_sq = 0.0;  // int (int_s^1 w mu(dr))^2 mu(ds)
        switch (measure_) {
            case Measure::DiracAtOne: {
                const double w1 = weight_(1.0);
                check_weight(w1, 1.0);
                drift_integral_ = w1;
                tail_sq = w1 * w1;
                break;
            }
            case Measure::DiscretePartition: {
                std::vector<double> wd(partition_.size());
                double prev = 0.0;
                drift_integral_ = 0.0;
                for (std::size_t k = 0; k < partition_.size(); ++k) {
                    const double r = partition_[k];
                    const double w = weight_(r);
                    check_weight(w, r);
                    wd[k] = w * (r - prev);
                    drift_integral_ += r * wd[k];
                    prev = r;
                }
                double tail = 0.0;
                for (std::size_t k = partition_.size(); k-- > 0;) {
                    tail += wd[k];
                    const double delta = partition_[k] - (k == 0 ? 0.0 : partition_[k - 1]);
                    tail_sq += tail * tail * delta;
                }
                break;
            }
            case Measure::Lebesgue: {
                const std::size_t n = kQuadraturePoints;
                const double h = 1.0 / static_cast<double>(n - 1);
                std::vector<double> w(n);
                for (std::size_t i = 0; i < n; ++i) {
                    const double r = static_cast<double>(i) * h;
                    w[i] = weight_(r);
                    check_weight(w[i], r);
                }
                // Cumulative trapezoid from the right for W(s) = int_s^1 w(r) dr.
                std::vector<double> tail(n, 0.0);
                for (std::size_t i = n - 1; i-- > 0;) tail[i] = tail[i + 1] + 0.5 * h * (w[i] + w[i + 1]);
                drift_integral_ = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double c = (i == 0 || i == n - 1) ? 0.5 * h : h;
                    drift_integral_ += c * static_cast<double>(i) * h * w[i];
                    tail_sq += c * tail[i] * tail[i];
                }
                break;
            }
        }
        if (!(drift_integral_ > 0.0) || !(tail_sq > 0.0))
            throw InvalidArgument("WeightSpec '" + name_ + "': degenerate weight (int r w(r) mu(dr) must be positive)");
        normalizer_ = 1.0 / std::sqrt(tail_sq);
    }

    void check_weight(double w, double r) const {
        if (!std::isfinite(w) || w < 0.0) {
            std::ostringstream os;
            os << "WeightSpec '" << name_ << "': weight must be finite and nonnegative (w(" << r << ") = " << w << ")";
            throw InvalidArgument(os.str());
        }
    }

    Measure measure_;
    WeightFn weight_;
    std::string name_;
    std::vector<double> partition_;
    double normalizer_ = std::numeric_limits<double>::quiet_NaN();
    double drift_integral_ = std::numeric_limits<double>::quiet_NaN();
};

[[nodiscard]] inline double normalizer(const WeightSpec& spec) { return spec.normalizer(); }
[[nodiscard]] inline double drift_factor(const WeightSpec& spec) { return spec.drift_factor(); }

/// C_w under the exact finite-sample measure {i/T} for Lebesgue specs; the
/// other measures are already discrete and return normalizer(spec).
[[nodiscard]] inline double normalizer_on_partition(const WeightSpec& spec, std::size_t T) {
    if (spec.measure() != Measure::Lebesgue) return spec.normalizer();
    const double dt = 1.0 / static_cast<double>(T);
    double tail = 0.0, acc = 0.0;
    for (std::size_t i = T; i >= 1; --i) {
        tail += spec.weight(static_cast<double>(i) * dt) * dt;
        acc += tail * tail * dt;
    }
    return 1.0 / std::sqrt(acc);
}

/// Coefficients c_i (i = 0..T) with g_w(S) = sum_i c_i S(i/T).
[[nodiscard]] inline Vector functional_coefficients(const WeightSpec& spec, std::size_t T) {
    Vector c = Vector::Zero(static_cast<Eigen::Index>(T + 1));
    const double Cw = spec.normalizer();
    const double Td = static_cast<double>(T);
    switch (spec.measure()) {
        case Measure::DiracAtOne:
            c(static_cast<Eigen::Index>(T)) = Cw * spec.weight(1.0);
            break;
        case Measure::Lebesgue:
            for (std::size_t i = 1; i <= T; ++i)
                c(static_cast<Eigen::Index>(i)) = Cw * spec.weight(static_cast<double>(i) / Td) / Td;
            break;
        case Measure::DiscretePartition: {
            double prev = 0.0;
            for (double r : spec.partition()) {
                const double scaled = r * Td;
                const double idx = std::round(scaled);
                if (std::abs(scaled - idx) > 1e-8 * std::max(1.0, Td))
                    throw InvalidArgument("apply_g: partition point is not of the form i/T");
                c(static_cast<Eigen::Index>(idx)) += Cw * spec.weight(r) * (r - prev);
                prev = r;
            }
            break;
        }
    }
    return c;
}

/// g_w(S) = C_w * sum_i S(r_i) w(r_i) (r_i - r_{i-1}).
[[nodiscard]] inline Curve apply_g(const WeightSpec& spec, const MomentProcess& process) {
    const Vector c = functional_coefficients(spec, process.T());
    return {process.grid(), process.values().transpose() * c};
}

/// T * ||g_w(S)||^2.
[[nodiscard]] inline double statistic(const WeightSpec& spec, const MomentProcess& process) {
    const Curve g = apply_g(spec, process);
    return static_cast<double>(process.T()) * inner_product(g, g);
}

}  // namespace funflir
