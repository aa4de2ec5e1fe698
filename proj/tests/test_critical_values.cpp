#include "funflir/critical_values.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace funflir;

namespace {

// Imhof's inversion of P(sum lambda_j chi2_1 > x), integrated by composite
// Simpson. Adequate for four or more positive weights.
double imhof_tail(const std::vector<double>& lambdas, double x) {
    auto f = [&](double u) {
        if (u == 0.0) {
            double s = 0.0;
            for (double l : lambdas) s += l;
            return 0.5 * (s - x);
        }
        double theta = -0.5 * x * u, logrho = 0.0;
        for (double l : lambdas) {
            theta += 0.5 * std::atan(l * u);
            logrho += 0.25 * std::log1p(l * l * u * u);
        }
        return std::sin(theta) / (u * std::exp(logrho));
    };
    const double U = 400.0;
    const int n = 400000;
    const double h = U / n;
    double acc = f(0.0) + f(U);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
    return 0.5 + acc * h / 3.0 / std::numbers::pi;
}

double chi2_1_tail(double x) { return std::erfc(std::sqrt(x / 2.0)); }

}  // namespace

TEST(Imhof, OracleSelfCheck) {
    // Four equal weights 0.5 => 0.5 chi2_4, tail exp(-x)(1 + x).
    const std::vector<double> l(4, 0.5);
    for (double x : {0.5, 2.0, 5.0}) EXPECT_NEAR(imhof_tail(l, x), std::exp(-x) * (1.0 + x), 1e-6);
}

TEST(McQuantile, ChiSquareOne) {
    EXPECT_NEAR(mc_quantile({1.0}, 0.05, 500000, 1), 3.841459, 0.05);
}

TEST(McQuantile, ExponentialOracle) {
    EXPECT_NEAR(mc_quantile({0.5, 0.5}, 0.05, 500000, 2), -std::log(0.05), 0.05);
}

TEST(McQuantile, AgainstImhof) {
    const std::vector<double> l{3.0, 2.0, 1.0, 0.5, 0.25};
    const double q = mc_quantile(l, 0.05, 500000, 3);
    EXPECT_NEAR(imhof_tail(l, q), 0.05, 0.002);
    EXPECT_NEAR(mc_pvalue(l, 10.0, 500000, 4), imhof_tail(l, 10.0), 0.003);
}

TEST(McQuantile, Homogeneity) {
    const std::vector<double> l{2.0, 1.0, 0.3};
    std::vector<double> l7;
    for (double v : l) l7.push_back(7.0 * v);
    EXPECT_NEAR(mc_quantile(l7, 0.1, 20000, 5), 7.0 * mc_quantile(l, 0.1, 20000, 5), 1e-10);
}

TEST(McQuantile, DegenerateThrows) {
    EXPECT_THROW((void)mc_quantile({0.0, 0.0}, 0.05, 1000, 1), DegenerateSpectrum);
    EXPECT_THROW((void)mc_quantile({1e-15}, 0.05, 1000, 1), DegenerateSpectrum);
    EXPECT_THROW((void)mc_quantile({-1.0, 1.0}, 0.05, 1000, 1), InvalidArgument);
    EXPECT_THROW((void)mc_quantile({1.0}, 0.05, 0, 1), InvalidArgument);
}

TEST(McQuantile, Monotonicity) {
    const std::vector<double> l{2.0, 1.0, 0.5};
    double prev = 1e300;
    for (double a : {0.01, 0.05, 0.1, 0.2, 0.5}) {
        const double q = mc_quantile(l, a, 50000, 6);
        EXPECT_LT(q, prev);
        prev = q;
    }
    for (std::size_t j = 0; j < l.size(); ++j) {
        auto bigger = l;
        bigger[j] += 0.3;
        EXPECT_GE(mc_quantile(bigger, 0.05, 50000, 6), mc_quantile(l, 0.05, 50000, 6));
    }
}

TEST(McQuantile, Determinism) {
    const std::vector<double> l{1.3, 0.4};
    EXPECT_EQ(mc_quantile(l, 0.05, 10000, 42), mc_quantile(l, 0.05, 10000, 42));
    EXPECT_EQ(mc_pvalue(l, 2.0, 10000, 42), mc_pvalue(l, 2.0, 10000, 42));
    EXPECT_NE(mc_quantile(l, 0.05, 10000, 42), mc_quantile(l, 0.05, 10000, 43));
}

TEST(McQuantile, OrderStatisticConvention) {
    std::vector<double> s{5, 1, 4, 2, 3, 9, 8, 7, 6, 10};
    EXPECT_EQ(empirical_quantile(s, 0.1), 9.0);  // ceil(0.9 * 10) = 9th smallest
    EXPECT_EQ(empirical_quantile(s, 0.05), 10.0);
    EXPECT_EQ(empirical_quantile(s, 0.5), 5.0);
}

TEST(McPvalue, Examples) {
    const std::size_t n = 500000;
    EXPECT_NEAR(mc_pvalue({1.0}, 0.0, n, 7), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(mc_pvalue({1.0}, 1e30, n, 7), 1.0 / (n + 1.0));
    EXPECT_NEAR(mc_pvalue({1.0}, 3.841, n, 7), 0.05, 0.003);
    EXPECT_NEAR(mc_pvalue({1.0}, 1.0, n, 8), chi2_1_tail(1.0), 0.003);
}

TEST(LocalLimit, ZeroShiftMatchesNull) {
    const auto g = Grid::uniform(51);
    const std::vector<Curve> v{fourier_basis(1, g), fourier_basis(2, g)};
    const std::vector<double> l{1.0, 0.5};
    auto a = local_limit_draws(l, v, Curve::zero(g), 50000, 9);
    WeightedChiSq ref(l, 50000, 10);
    std::sort(a.begin(), a.end());
    const auto& b = ref.sorted_sample();
    double ks = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i; else ++j;
        ks = std::max(ks, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    EXPECT_LE(ks, 0.01);
}

TEST(LocalLimit, DegenerateConstant) {
    const auto g = Grid::uniform(51);
    const Curve v = fourier_basis(1, g);
    const auto d = local_limit_draws({0.0}, {v}, 2.0 * v, 100, 1);
    for (double x : d) EXPECT_NEAR(x, 4.0, 1e-12);
}

TEST(LocalLimit, NoncentralMean) {
    const auto g = Grid::uniform(51);
    const Curve v = fourier_basis(2, g);
    const double delta = 1.5;
    const auto d = local_limit_draws({1.0}, {v}, delta * v, 200000, 2);
    double m = 0.0;
    for (double x : d) m += x;
    m /= static_cast<double>(d.size());
    EXPECT_NEAR(m, 1.0 + delta * delta, 0.02 * (1.0 + delta * delta));
    EXPECT_THROW((void)local_limit_draws({1.0, 1.0}, {v}, v, 10, 1), LengthMismatch);
}

TEST(LocalPower, SizeAndMonotonicity) {
    const auto g = Grid::uniform(51);
    const std::vector<Curve> v{fourier_basis(1, g), fourier_basis(2, g), fourier_basis(3, g)};
    const std::vector<double> l{1.0, 0.6, 0.2};
    EXPECT_NEAR(local_power(l, v, Curve::zero(g), 0.05, 100000, 3), 0.05, 0.01);
    const Curve dir = v[0] + 0.5 * v[1];
    double prev = 0.0;
    for (double c : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        const double p = local_power(l, v, c * dir, 0.05, 100000, 3);
        EXPECT_GE(p, prev);
        prev = p;
    }
    EXPECT_GT(prev, 0.9);
}

TEST(LocalPower, LargerDriftFactorDominates) {
    // Shifts kappa * D_w * c for two weights; the larger D_w has more power.
    const auto g = Grid::uniform(51);
    const std::vector<Curve> v{fourier_basis(1, g), fourier_basis(2, g)};
    const std::vector<double> l{1.0, 0.5};
    const Curve c = v[0] + v[1];
    const double d_hi = 1.0, d_lo = std::sqrt(3.0) / 2.0;
    for (double kappa : {0.5, 1.5, 3.0})
        EXPECT_GE(local_power(l, v, (kappa * d_hi) * c, 0.05, 100000, 4),
                  local_power(l, v, (kappa * d_lo) * c, 0.05, 100000, 4));
}

TEST(TailTruncation, StableAcrossDoubledDT) {
    // Geometrically decaying spectrum of the kind produced by the DGPs.
    std::vector<double> full;
    for (int j = 0; j < 26; ++j) full.push_back(std::pow(0.6, j));
    const std::vector<double> head(full.begin(), full.begin() + 13);
    const double q1 = mc_quantile(head, 0.05, 200000, 5), q2 = mc_quantile(full, 0.05, 200000, 5);
    EXPECT_LT(std::abs(q2 - q1) / q1, 0.02);
}
