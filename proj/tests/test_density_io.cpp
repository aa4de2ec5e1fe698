#include "funflir/density.hpp"
#include "funflir/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace funflir;

namespace {

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return x;
}

DensitySample uniform01(std::size_t n = 101) {
    return {linspace(0.0, 1.0, n), RowMatrix::Ones(2, static_cast<Eigen::Index>(n))};
}

// Two-component normal mixture on [-10, 30].
DensitySample mixture(std::size_t periods, std::uint64_t seed) {
    const auto x = linspace(-10.0, 30.0, 161);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> um(0.0, 20.0), us(2.0, 5.0), uw(0.2, 0.8);
    RowMatrix p(static_cast<Eigen::Index>(periods), 161);
    for (Eigen::Index t = 0; t < p.rows(); ++t) {
        const double m1 = um(rng), m2 = um(rng), s1 = us(rng), s2 = us(rng), w = uw(rng);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto phi = [&](double m, double s) {
                return std::exp(-0.5 * std::pow((x[i] - m) / s, 2)) / (s * std::sqrt(2 * 3.141592653589793));
            };
            p(t, static_cast<Eigen::Index>(i)) = w * phi(m1, s1) + (1 - w) * phi(m2, s2);
        }
    }
    return {x, p};
}

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("funflir_test_" + name)).string();
}

}  // namespace

TEST(Transform, UniformExamples) {
    const auto d = uniform01();
    const auto clr = transform(d, TransformKind::CLR);
    EXPECT_LT(clr.values().cwiseAbs().maxCoeff(), 1e-12);
    const auto qf = transform(d, TransformKind::QF);
    const auto levels = quantile_levels();
    for (std::size_t i = 0; i < levels.size(); ++i) EXPECT_NEAR(qf.values()(0, static_cast<Eigen::Index>(i)), levels[i], 1e-6);
    std::size_t floored = 0;
    const auto lcdf = transform(d, TransformKind::LCDF, &floored);
    EXPECT_NEAR(lcdf.values()(0, 50), 0.0, 1e-12);
    for (int i = 1; i < 100; ++i) {
        const double s = i / 100.0;
        EXPECT_NEAR(lcdf.values()(0, i), std::log(s / (1 - s)), 1e-9);
    }
    EXPECT_EQ(floored, 4u);  // P = 0 and P = 1 at the two ends, both periods
}

TEST(Transform, HazardRatesOnExponentialLikeDensity) {
    const auto x = linspace(0.0, 1.0, 2001);
    RowMatrix p(2, 2001);
    for (std::size_t i = 0; i < x.size(); ++i) p.col(static_cast<Eigen::Index>(i)).setConstant(2.0 * x[i]);
    const DensitySample d(x, p);
    const auto lhr = transform(d, TransformKind::LHR);
    const auto lrhr = transform(d, TransformKind::LRHR);
    // P = s^2: log hazard = log(2s/(1 - s^2)), log reverse hazard = log(2/s).
    for (int i : {200, 1000, 1600}) {
        const double s = x[static_cast<std::size_t>(i)];
        EXPECT_NEAR(lhr.values()(0, i), std::log(2 * s / (1 - s * s)), 1e-4);
        EXPECT_NEAR(lrhr.values()(0, i), std::log(2 / s), 1e-4);
    }
}

TEST(Transform, DomainMappedToUnitInterval) {
    const auto d = mixture(3, 1);
    for (auto k : {TransformKind::CLR, TransformKind::PDF, TransformKind::LHR, TransformKind::QF}) {
        const auto s = transform(d, k);
        EXPECT_DOUBLE_EQ(s.grid()->points().front(), 0.0);
        EXPECT_DOUBLE_EQ(s.grid()->points().back(), 1.0);
        EXPECT_EQ(s.length(), 3u);
    }
    // CLR integrates to zero on the mapped domain.
    const auto clr = transform(d, TransformKind::CLR);
    for (std::size_t t = 0; t < 3; ++t)
        EXPECT_NEAR(inner_product(clr.curve(t), Curve::constant(clr.grid(), 1.0)), 0.0, 1e-10);
    EXPECT_THROW((void)transform_from_name("logit"), InvalidArgument);
}

TEST(Transform, PdfPreservesMoments) {
    const auto d = mixture(5, 2);
    const auto pdf = transform(d, TransformKind::PDF);
    const double len = d.b() - d.a();
    for (std::size_t t = 0; t < 5; ++t) {
        const auto m0 = standardized_moments(d.support(), d.values().row(static_cast<Eigen::Index>(t)).transpose(), 4);
        const auto m1 = standardized_moments(pdf.grid()->points(), pdf.curve(t).values(), 4);
        EXPECT_NEAR(d.a() + len * m1[0], m0[0], 1e-10);
        EXPECT_NEAR(len * m1[1], m0[1], 1e-10);
        EXPECT_NEAR(m1[2], m0[2], 1e-10);
        EXPECT_NEAR(m1[3], m0[3], 1e-10);
    }
}

TEST(Transform, QuantileInvertsCdf) {
    const auto d = mixture(4, 3);
    const auto qf = transform(d, TransformKind::QF);
    const auto levels = quantile_levels();
    const auto& x = d.support();
    for (Eigen::Index t = 0; t < 4; ++t) {
        const auto P = d.cdf(t);
        for (std::size_t i = 0; i < levels.size(); ++i) {
            const double q = qf.values()(t, static_cast<Eigen::Index>(i));
            const auto it = std::upper_bound(x.begin(), x.end(), q);
            const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(it - x.begin()), 1, x.size() - 1);
            const double c = P[k - 1] + (q - x[k - 1]) / (x[k] - x[k - 1]) * (P[k] - P[k - 1]);
            EXPECT_NEAR(c, levels[i], 1e-4);
        }
    }
}

TEST(DensitySample, ValidationAndRenormalization) {
    const auto x = linspace(0.0, 1.0, 11);
    RowMatrix p = RowMatrix::Ones(2, 11);
    p.row(1) *= 2.0;
    const DensitySample d(x, p);
    ASSERT_EQ(d.renormalized().size(), 1u);
    EXPECT_EQ(d.renormalized()[0], 1u);
    EXPECT_NEAR(d.mass(1), 1.0, 1e-12);
    RowMatrix bad = RowMatrix::Ones(1, 11);
    bad(0, 3) = -0.1;
    EXPECT_THROW(DensitySample(x, bad), InvalidArgument);
    EXPECT_THROW(DensitySample(x, RowMatrix::Zero(1, 11)), InvalidArgument);
    EXPECT_THROW(DensitySample(x, RowMatrix::Ones(1, 10)), LengthMismatch);
}

TEST(Moments, UniformAndSymmetric) {
    const auto d = uniform01(2001);
    const auto m = standardized_moments(d, 4);
    EXPECT_NEAR(m(0, 0), 0.5, 1e-6);
    EXPECT_NEAR(m(0, 1), 1.0 / std::sqrt(12.0), 1e-4);
    EXPECT_NEAR(m(0, 2), 0.0, 1e-6);
    EXPECT_NEAR(m(0, 3), 1.8, 1e-3);
    const auto x = linspace(-5.0, 5.0, 501);
    Vector p(501);
    for (int i = 0; i < 501; ++i) p(i) = std::exp(-0.5 * x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)]);
    const auto n = standardized_moments(x, p, 4);
    EXPECT_NEAR(n[0], 0.0, 1e-12);
    EXPECT_NEAR(n[2], 0.0, 1e-6);
    EXPECT_NEAR(n[3], 3.0, 1e-3);
    EXPECT_THROW((void)standardized_moments(x, p, 5), InvalidArgument);
}

TEST(LaggedAuxiliary, ExamplesAndAlignment) {
    const auto g = Grid::uniform(4);
    RowMatrix m(3, 4);
    m << 1, 2, 3, 4, 10, 20, 30, 40, 100, 200, 300, 400;
    const FunctionalSeries X(g, m);
    const auto z1 = build_lagged_auxiliary(X, 1);
    EXPECT_EQ(z1.length(), 2u);
    EXPECT_EQ(z1.values().row(0), m.row(0));
    EXPECT_EQ(z1.values().row(1), m.row(1));
    const auto z2 = build_lagged_auxiliary(FunctionalSeries(g, RowMatrix(m.replicate(2, 1))), 2);
    EXPECT_EQ(z2.values()(0, 0), 10.0 + 0.5 * 1.0);  // Z_3 = X_2 + 0.5 X_1
    EXPECT_THROW((void)build_lagged_auxiliary(X, 3), InvalidArgument);

    // Naive loop oracle for the pairing of rows.
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd(0.0, 1.0);
    RowMatrix big(20, 4);
    for (Eigen::Index i = 0; i < big.size(); ++i) big.data()[i] = nd(rng);
    const FunctionalSeries B(g, big);
    const auto z3 = build_lagged_auxiliary(B, 3, 0.5);
    const auto trimmed = trim_front(B, 3);
    ASSERT_EQ(z3.length(), trimmed.length());
    for (std::size_t t = 3; t < 20; ++t) {
        RowMatrix oracle = RowMatrix::Zero(1, 4);
        for (std::size_t j = 1; j <= 3; ++j) oracle += std::pow(0.5, double(j - 1)) * big.row(static_cast<Eigen::Index>(t - j));
        EXPECT_LT((z3.values().row(static_cast<Eigen::Index>(t - 3)) - oracle).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_EQ(trimmed.values().row(static_cast<Eigen::Index>(t - 3)), big.row(static_cast<Eigen::Index>(t)));
    }
}

TEST(Io, CurvesRoundTripBitExact) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd(0.0, 1e3);
    RowMatrix m(3, 101);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng) / 7.0;
    const FunctionalSeries X(Grid::uniform(101), m);
    const auto path = tmp_path("curves.csv");
    write_curves(path, X);
    const auto back = load_curves(path);
    EXPECT_EQ(back.length(), 3u);
    EXPECT_EQ(back.values(), X.values());
    EXPECT_EQ(back.grid()->points(), X.grid()->points());

    const ScalarSeries y(Vector(m.row(0).transpose()));
    const auto ypath = tmp_path("y.csv");
    write_scalars(ypath, y, "y");
    EXPECT_EQ(load_scalars(ypath).values(), y.values());
    std::filesystem::remove(path);
    std::filesystem::remove(ypath);
}

TEST(Io, ErrorsCiteRows) {
    const auto path = tmp_path("bad.csv");
    {
        std::ofstream f(path);
        f << "0,0.5,1\n1,2,3\n4,,6\n";
    }
    try {
        (void)load_curves(path);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("column 2"), std::string::npos) << e.what();
    }
    {
        std::ofstream f(path);
        f << "0,0.5,1\n1,2,3\n4,5\n";
    }
    EXPECT_THROW((void)load_curves(path), ParseError);
    {
        std::ofstream f(path);
        f << "0,0.7,0.5,1\n1,2,3,4\n1,2,3,4\n";
    }
    EXPECT_THROW((void)load_curves(path), ParseError);
    {
        std::ofstream f(path);
        f << "y\n1.5\nnan\n";
    }
    EXPECT_THROW((void)load_scalars(path), ParseError);
    std::filesystem::remove(path);
    EXPECT_THROW((void)load_curves(tmp_path("missing.csv")), ParseError);
}
