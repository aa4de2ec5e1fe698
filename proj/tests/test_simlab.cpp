#include "funflir/simlab.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace funflir;

namespace {

double corr(const Vector& a, const Vector& b) {
    const Vector x = a.array() - a.mean();
    const Vector y = b.array() - b.mean();
    return x.dot(y) / std::sqrt(x.squaredNorm() * y.squaredNorm());
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i; else ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

DgpSpec spec(std::size_t T, std::uint64_t seed, double beta = 0.1) {
    DgpSpec s;
    s.T = T;
    s.seed = seed;
    s.beta_u = beta;
    return s;
}

}  // namespace

TEST(BrownianBridge, EndpointsAndMidpointVariance) {
    const auto g = Grid::uniform(101);
    Rng rng = make_rng(1);
    const RowMatrix B = brownian_bridges(g, 50000, rng);
    EXPECT_EQ(B.col(0).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(B.col(100).cwiseAbs().maxCoeff(), 0.0);
    const double var = B.col(50).squaredNorm() / 50000.0;
    EXPECT_NEAR(var, 0.25, 0.25 * 0.05);
    const double var_q = B.col(25).squaredNorm() / 50000.0;
    EXPECT_NEAR(var_q, 0.25 * 0.75, 0.1875 * 0.05);
}

TEST(Baseline, NullResponseIsInnovation) {
    auto s = spec(100, 2);
    const auto d = draw(s);
    const auto y0 = respond(d, 0.0);
    EXPECT_EQ((y0.values() - d.base).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(norm(d.theta0), 0.0);
    s.kappa = 20.0;
    const auto sample = gen_baseline(s);
    const Vector diff = sample.y.values() - d.base;
    const Vector expected = (20.0 / std::sqrt(100.0)) * d.X.project(d.psi_bar);
    EXPECT_LT((diff - expected).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(norm(d.psi_bar), 1.0, 1e-12);
}

TEST(Baseline, EndogeneityControlsCorrelation) {
    auto median_abs_corr = [](double beta) {
        std::vector<double> c;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto d = draw(spec(2000, 300 + seed, beta));
            c.push_back(std::abs(corr(d.X.project(fourier_basis(1, d.X.grid())), d.base)));
        }
        std::nth_element(c.begin(), c.begin() + 10, c.end());
        return c[10];
    };
    EXPECT_LT(median_abs_corr(0.0), 0.1);
    EXPECT_GT(median_abs_corr(0.25), 0.05);
}

TEST(Baseline, Stationarity) {
    std::vector<double> early, late;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto d = draw(spec(2000, 500 + seed));
        for (std::size_t t = 500; t < 1000; ++t) early.push_back(norm(d.X.curve(t)));
        for (std::size_t t = 1500; t < 2000; ++t) late.push_back(norm(d.X.curve(t)));
    }
    EXPECT_LE(ks_distance(early, late), 0.05);
}

TEST(Baseline, WeakDesignActiveSet) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto s = spec(50, seed);
        s.design = Design::WeaklyInformative;
        const auto p = draw_params(s);
        const auto n = std::count(p.active.begin(), p.active.end(), true);
        EXPECT_GE(n, 1);
        EXPECT_LE(n, 4);
        for (std::size_t j = 5; j < p.active.size(); ++j) EXPECT_FALSE(p.active[j]);
        for (double a : p.a) {
            EXPECT_GE(a, -0.2);
            EXPECT_LE(a, 0.8);
        }
    }
    const auto p = draw_params(spec(50, 1));
    EXPECT_TRUE(std::all_of(p.active.begin(), p.active.end(), [](bool b) { return b; }));
}

TEST(Baseline, Determinism) {
    const auto a = draw(spec(80, 7)), b = draw(spec(80, 7)), c = draw(spec(80, 8));
    EXPECT_EQ(a.X.values(), b.X.values());
    EXPECT_EQ(a.Z.values(), b.Z.values());
    EXPECT_EQ(a.base, b.base);
    EXPECT_NE(a.base, c.base);
    EXPECT_THROW((void)draw(spec(5, 1)), InvalidArgument);
}

TEST(BaselineIntercept, SubtractingMeansRecoversBaseline) {
    auto s = spec(120, 9);
    s.kappa = 10.0;
    const auto a = gen_baseline(s);
    const auto b = gen_baseline_intercept(s);
    const RowMatrix X = b.X.values().rowwise() - b.mu_X.values().transpose();
    const RowMatrix Z = b.Z.values().rowwise() - b.mu_Z.values().transpose();
    // The means enter y through mu_y only; kappa multiplies the centered signal.
    const Vector y = b.y.values().array() - b.mu_y;
    EXPECT_LT((X - a.X.values()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((Z - a.Z.values()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((y - a.y.values()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(norm(b.mu_X), 1.0, 1e-12);
}

TEST(Seong, BetaDensityIntegrates) {
    const auto g = Grid::uniform(101);
    const Curve f = Curve::from_function(g, [](double s) { return detail::beta_density(s, 2.0, 2.0); });
    EXPECT_NEAR(inner_product(f, Curve::constant(g, 1.0)), 1.0, 1e-3);
    EXPECT_NEAR(detail::beta_density(0.5, 2.0, 2.0), 1.5, 1e-12);
}

TEST(Seong, StructureOfDraws) {
    DgpSpec s;
    s.family = DgpFamily::SeongComparison;
    s.T = 100;
    s.seed = 10;
    const auto d = draw(s);
    const auto g = d.X.grid();
    // theta0 = A phi with kernel 1 - (s - r)^2, by direct quadrature.
    Vector phi = Vector::Zero(101);
    for (std::size_t j = 0; j < d.params.phi.size(); ++j) phi += d.params.phi[j] * fourier_basis(j + 1, g).values();
    for (std::size_t i = 0; i < 101; i += 10) {
        double acc = 0.0;
        for (std::size_t k = 0; k < 101; ++k) {
            const double diff = g->points()[i] - g->points()[k];
            acc += g->weights()(static_cast<Eigen::Index>(k)) * (1.0 - diff * diff) * phi(static_cast<Eigen::Index>(k));
        }
        EXPECT_NEAR(d.theta0[i], acc, 1e-12);
    }
    EXPECT_NEAR(norm(d.psi_bar), 1.0, 1e-12);
    s.kappa = std::sqrt(0.1);
    const auto y = gen_seong(s).y.values();
    EXPECT_LT((y - d.base - s.kappa * d.X.project(d.psi_bar)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW((void)gen_seong(spec(100, 1)), InvalidArgument);
}

TEST(Seong, WeakDesignProjectsOnSecondBasis) {
    DgpSpec s;
    s.family = DgpFamily::SeongComparison;
    s.design = Design::WeaklyInformative;
    s.settings.eta_tilde_scale = 0.0;
    s.T = 40;
    s.seed = 11;
    const auto d = draw(s);
    const Curve f2 = fourier_basis(2, d.Z.grid());
    for (std::size_t t = 0; t < 40; ++t) {
        const Curve z = d.Z.curve(t);
        EXPECT_LT(norm(z - inner_product(z, f2) * f2), 1e-10);
    }
}

TEST(PopulationMoments, RequiresFixedParams) {
    auto s = spec(100, 12);
    EXPECT_THROW((void)population_moments(s, 2, 500), InvalidArgument);
    s.params = draw_params(s);
    const auto pm = population_moments(s, 2, 500);
    EXPECT_EQ(pm.periods, 1000u);
    EXPECT_GT(pm.lambda_Zu.trace(), 0.0);
    EXPECT_EQ(pm.lambda_Zu.max_asymmetry(), 0.0);
}

TEST(Experiment, ThreadCountDoesNotChangeResults) {
    ExperimentPlan plan;
    plan.dgps = {spec(60, 0)};
    plan.kappas = {0.0, 20.0};
    plan.kernels = {KernelSpec::bartlett()};
    plan.weights = {WeightSpec::endpoint(), WeightSpec::power(0)};
    plan.replications = 100;
    plan.base_seed = 5;
    plan.test.mc_draws = 500;
    const auto a = run_experiment(plan);
    plan.threads = 3;
    const auto b = run_experiment(plan);
    ASSERT_EQ(a.cells.size(), 4u);
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        EXPECT_EQ(a.cells[i].rejections, b.cells[i].rejections);
        EXPECT_EQ(a.cells[i].completed + a.cells[i].errors, 100u);
        EXPECT_GE(a.cells[i].rate(), 0.0);
        EXPECT_LE(a.cells[i].rate(), 100.0);
    }
    EXPECT_GE(a.find(Design::Informative, 0.1, 60, 20.0, "bartlett", "endpoint").rejections,
              a.find(Design::Informative, 0.1, 60, 0.0, "bartlett", "endpoint").rejections);
    plan.replications = 10;
    EXPECT_THROW((void)run_experiment(plan), InvalidArgument);
}

TEST(Experiment, TablePlans) {
    const auto t2 = table_plan("2", 100, 1);
    EXPECT_EQ(t2.dgps.size(), 12u);
    EXPECT_EQ(t2.kappas.size(), 4u);
    EXPECT_EQ(t2.kernels.size(), 2u);
    EXPECT_EQ(t2.weights.size(), 5u);
    EXPECT_EQ(t2.test.variant, Variant::Plain);
    const auto t1 = table_plan("1", 100, 1, {100});
    EXPECT_EQ(t1.dgps.size(), 3u);
    EXPECT_EQ(t1.test.variant, Variant::ExogeneityBenchmark);
    const auto t3 = table_plan("3", 100, 1);
    EXPECT_EQ(t3.dgps.size(), 6u);
    EXPECT_EQ(t3.test.variant, Variant::Intercept);
    EXPECT_EQ(t3.kernels.front().family, KernelFamily::Parzen);
    EXPECT_EQ(table_plan("A4", 100, 1).test.variant, Variant::Intercept);
    EXPECT_THROW((void)table_plan("9", 100, 1), InvalidArgument);
}
