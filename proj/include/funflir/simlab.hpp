#pragma once

// Data-generating processes for the Monte Carlo designs and the experiment
// driver that turns a grid of designs and test settings into rejection rates.

#include "funflir/critical_values.hpp"
#include "funflir/errors.hpp"
#include "funflir/hilbert.hpp"
#include "funflir/lrv.hpp"
#include "funflir/rng.hpp"
#include "funflir/testkit.hpp"
#include "funflir/weights.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace funflir {

enum class DgpFamily { BaselineNoIntercept, BaselineIntercept, SeongComparison };
enum class Design { Informative, WeaklyInformative };

[[nodiscard]] inline std::string family_name(DgpFamily f) {
    switch (f) {
        case DgpFamily::BaselineNoIntercept: return "baseline";
        case DgpFamily::BaselineIntercept: return "baseline-intercept";
        case DgpFamily::SeongComparison: return "seong";
    }
    return "unknown";
}

[[nodiscard]] inline std::string design_name(Design d) {
    return d == Design::Informative ? "informative" : "weak";
}

/// Discretization and the constants left open by the design description.
struct DgpSettings {
    std::size_t grid_points = 101;
    std::size_t j_max = 50;         ///< basis terms kept in the functional AR recursion
    std::size_t burn_in = 200;
    double v_scale = 0.25;          ///< scale of the Brownian-bridge noise in Z (baseline)
    double vartheta = 1.0;          ///< X = vartheta Z + V (Seong design)
    double eta_tilde_scale = 1.0;   ///< noise scale in the weak Seong auxiliary
};

/// Structural draws of one replication. Drawn afresh from the replication
/// seed unless supplied through DgpSpec::params.
struct DgpParams {
    std::vector<double> a;        ///< AR coefficients a_j (before the 0.95^(j-1) decay)
    std::vector<double> b;        ///< Z loadings b_j
    std::vector<bool> active;     ///< 1_J(j); all true in the informative design
    std::vector<double> psi;      ///< coefficients of psi on f_1, f_2, ...
    std::vector<double> phi;      ///< Seong design: coefficients of phi
};

struct DgpSpec {
    DgpFamily family = DgpFamily::BaselineNoIntercept;
    double beta_u = 0.1;
    Design design = Design::Informative;
    std::size_t T = 200;
    double kappa = 0.0;
    std::uint64_t seed = 0;
    DgpSettings settings;
    std::optional<DgpParams> params;

    void validate() const {
        if (T < 10) throw InvalidArgument("DgpSpec: T must be at least 10");
        if (!std::isfinite(beta_u)) throw InvalidArgument("DgpSpec: beta_u must be finite");
        if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw InvalidArgument("DgpSpec: kappa must be >= 0");
        if (settings.grid_points < 3) throw InvalidArgument("DgpSpec: need at least 3 grid points");
        if (settings.j_max < 5) throw InvalidArgument("DgpSpec: j_max must be at least 5");
    }
};

/// Everything in one replication that does not depend on kappa: the response
/// is y = base + kappa * signal_scale * signal.
struct DgpDraws {
    FunctionalSeries Z;
    FunctionalSeries X;
    Vector base;
    Vector signal;                 ///< <X_t, psi_bar>
    double signal_scale = 1.0;
    Curve theta0;                  ///< slope under the null
    Curve psi_bar;
    DgpParams params;
    double mu_y = 0.0;
    Curve mu_X;
    Curve mu_Z;
};

struct DgpSample {
    FunctionalSeries Z;
    ScalarSeries y;
    FunctionalSeries X;
    Curve theta0;
    Curve psi_bar;
    double mu_y = 0.0;
    Curve mu_X;
    Curve mu_Z;
};

/// Brownian bridges on the grid: a random walk with N(0, dx) increments,
/// pinned by B = W - x W(1). One bridge per row.
[[nodiscard]] inline RowMatrix brownian_bridges(const GridPtr& grid, std::size_t count, Rng& rng,
                                                double scale = 1.0) {
    const auto n = static_cast<Eigen::Index>(grid->size());
    const auto& x = grid->points();
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector sd(n);
    sd(0) = 0.0;
    for (Eigen::Index i = 1; i < n; ++i) sd(i) = std::sqrt(x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i - 1)]);
    RowMatrix B(static_cast<Eigen::Index>(count), n);
    for (Eigen::Index t = 0; t < B.rows(); ++t) {
        double w = 0.0;
        B(t, 0) = 0.0;
        for (Eigen::Index i = 1; i < n; ++i) {
            w += sd(i) * normal(rng);
            B(t, i) = w;
        }
        const double end = B(t, n - 1);
        for (Eigen::Index i = 0; i < n; ++i) B(t, i) = scale * (B(t, i) - x[static_cast<std::size_t>(i)] * end);
        B(t, 0) = 0.0;
        B(t, n - 1) = 0.0;
    }
    return B;
}

namespace detail {

inline Curve fourier_combination(const std::vector<double>& coef, const GridPtr& grid) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(grid->size()));
    for (std::size_t j = 0; j < coef.size(); ++j) v += coef[j] * fourier_basis(j + 1, grid).values();
    return {grid, std::move(v)};
}

inline Curve unit(const Curve& c) {
    const double nn = norm(c);
    if (!(nn > 0.0)) throw InvalidArgument("simlab: zero direction");
    return c * (1.0 / nn);
}

// Mean curve sum_{j<=3} a_j f_j / ||a|| with a_j ~ N(0,1).
inline Curve random_mean_curve(Rng& rng, const GridPtr& grid) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> a(3);
    for (auto& v : a) v = normal(rng);
    return unit(fourier_combination(a, grid));
}

inline constexpr std::size_t kSeongTerms = 11;

}  // namespace detail

/// Structural draws for `spec` from the parameter stream of its seed.
[[nodiscard]] inline DgpParams draw_params(const DgpSpec& spec) {
    Rng rng = make_rng(derive_seed(spec.seed, {1}));
    std::normal_distribution<double> normal(0.0, 1.0);
    DgpParams p;
    if (spec.family == DgpFamily::SeongComparison) {
        p.phi.resize(detail::kSeongTerms);
        p.psi.resize(detail::kSeongTerms);
        for (std::size_t j = 0; j < detail::kSeongTerms; ++j) p.phi[j] = std::pow(0.5, static_cast<double>(j)) * normal(rng);
        for (std::size_t j = 0; j < detail::kSeongTerms; ++j) p.psi[j] = std::pow(0.5, static_cast<double>(j)) * normal(rng);
        return p;
    }
    const std::size_t J = spec.settings.j_max;
    std::uniform_real_distribution<double> ua(-0.2, 0.8), ub(0.8, 1.2);
    p.a.resize(J);
    p.b.resize(J);
    for (auto& v : p.a) v = ua(rng);
    for (auto& v : p.b) v = ub(rng);
    p.psi.resize(3);
    for (auto& v : p.psi) v = normal(rng);
    // J: N in {1..4} indices drawn without replacement from {1..5}.
    std::uniform_int_distribution<int> un(1, 4);
    const int N = un(rng);
    std::array<std::size_t, 5> idx{0, 1, 2, 3, 4};
    for (std::size_t i = 0; i < 4; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, 4);
        std::swap(idx[i], idx[pick(rng)]);
    }
    p.active.assign(J, spec.design == Design::Informative);
    if (spec.design == Design::WeaklyInformative)
        for (int k = 0; k < N; ++k) p.active[idx[static_cast<std::size_t>(k)]] = true;
    return p;
}

namespace detail {

inline DgpDraws baseline_draws(const DgpSpec& spec) {
    spec.validate();
    const DgpSettings& st = spec.settings;
    const GridPtr grid = Grid::uniform(st.grid_points);
    DgpParams p = spec.params ? *spec.params : draw_params(spec);
    const std::size_t J = st.j_max;
    if (p.a.size() != J || p.b.size() != J || p.active.size() != J || p.psi.empty())
        throw InvalidArgument("DgpParams: coefficient vectors do not match j_max");

    const auto Ji = static_cast<Eigen::Index>(J);
    const Matrix F = fourier_matrix(J, grid);                       // n x J
    const Matrix FW = grid->weights().asDiagonal() * F;             // projections
    const Vector g1 = FW.transpose() * Vector::Ones(F.rows());      // <1, f_j>
    Vector c(Ji), bz(Ji);
    for (std::size_t j = 0; j < J; ++j) {
        c(static_cast<Eigen::Index>(j)) = p.a[j] * std::pow(0.95, static_cast<double>(j));
        bz(static_cast<Eigen::Index>(j)) = p.active[j] ? p.b[j] : 0.0;
    }

    const std::size_t N = st.burn_in + spec.T;
    Rng rng = make_rng(derive_seed(spec.seed, {2}));
    std::normal_distribution<double> normal(0.0, 1.0);
    const RowMatrix E = brownian_bridges(grid, N, rng);
    Vector u(static_cast<Eigen::Index>(N));
    for (Eigen::Index t = 0; t < u.size(); ++t) u(t) = normal(rng);
    const RowMatrix Vz = brownian_bridges(grid, spec.T, rng, st.v_scale);

    const Matrix EC = E * FW;  // N x J
    const auto T = static_cast<Eigen::Index>(spec.T);
    const auto skip = static_cast<Eigen::Index>(st.burn_in);
    Matrix pred(T, Ji), zc(T, Ji);
    Vector xi = Vector::Zero(Ji);
    for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(N); ++t) {
        const Vector ar = c.cwiseProduct(xi);  // coefficients of X°_{t-1}
        const Vector shock = EC.row(t).transpose();
        if (t >= skip) {
            pred.row(t - skip) = ar.transpose();
            zc.row(t - skip) = bz.cwiseProduct(ar + shock).transpose();
        }
        xi = ar + (spec.beta_u * u(t)) * g1 + shock;
    }

    const Vector uk = u.tail(T);
    RowMatrix X = pred * F.transpose();
    X += E.bottomRows(T);
    X.colwise() += spec.beta_u * uk;
    RowMatrix Z = zc * F.transpose();
    Z += Vz;

    Curve psi_bar = unit(fourier_combination(p.psi, grid));
    FunctionalSeries Xs(grid, std::move(X));
    Vector signal = Xs.project(psi_bar);
    return {FunctionalSeries(grid, std::move(Z)), std::move(Xs), uk, std::move(signal),
            1.0 / std::sqrt(static_cast<double>(spec.T)), Curve::zero(grid), std::move(psi_bar), std::move(p),
            0.0, Curve::zero(grid), Curve::zero(grid)};
}

inline double beta_density(double s, double a, double b) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(s) +
                    (b - 1.0) * std::log1p(-s));
}

inline DgpDraws seong_draws(const DgpSpec& spec) {
    spec.validate();
    const DgpSettings& st = spec.settings;
    const GridPtr grid = Grid::uniform(st.grid_points);
    DgpParams p = spec.params ? *spec.params : draw_params(spec);
    if (p.phi.empty() || p.psi.empty()) throw InvalidArgument("DgpParams: Seong design needs phi and psi");
    const auto n = static_cast<Eigen::Index>(grid->size());
    const auto T = static_cast<Eigen::Index>(spec.T);
    const auto& s = grid->points();
    const Vector& w = grid->weights();

    Rng rng = make_rng(derive_seed(spec.seed, {2}));
    std::uniform_real_distribution<double> ushape(2.0, 5.0);
    RowMatrix Z(T, n);
    for (Eigen::Index t = 0; t < T; ++t) {
        const double a = ushape(rng);
        const double b = ushape(rng);
        for (Eigen::Index i = 0; i < n; ++i) Z(t, i) = beta_density(s[static_cast<std::size_t>(i)], a, b);
    }
    Z += brownian_bridges(grid, spec.T, rng);
    const RowMatrix V = brownian_bridges(grid, spec.T, rng);
    const RowMatrix Eb = brownian_bridges(grid, spec.T, rng);
    const RowMatrix eta_tilde = brownian_bridges(grid, spec.T, rng, st.eta_tilde_scale);

    RowMatrix X = st.vartheta * Z + V;
    const RowMatrix U = 0.8 * V + 0.6 * Eb;

    const Curve phi = fourier_combination(p.phi, grid);
    Matrix KA(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k) {
            const double d = s[static_cast<std::size_t>(i)] - s[static_cast<std::size_t>(k)];
            KA(i, k) = 1.0 - d * d;
        }
    Curve theta0 = apply(HilbertOperator(grid, KA), phi);
    Curve psi_bar = unit(fourier_combination(p.psi, grid));

    Vector base = X * w.cwiseProduct(theta0.values()) + U * w.cwiseProduct(phi.values());
    Vector signal = X * w.cwiseProduct(psi_bar.values());
    if (spec.design == Design::WeaklyInformative) {
        const Curve f2 = fourier_basis(2, grid);
        const Vector proj = Z * w.cwiseProduct(f2.values());
        Z = proj * f2.values().transpose();
        Z += eta_tilde;
    }
    return {FunctionalSeries(grid, std::move(Z)), FunctionalSeries(grid, std::move(X)), std::move(base),
            std::move(signal), 1.0, std::move(theta0), std::move(psi_bar), std::move(p),
            0.0, Curve::zero(grid), Curve::zero(grid)};
}

inline void add_means(DgpDraws& d, std::uint64_t seed) {
    const GridPtr& grid = d.X.grid();
    Rng rng = make_rng(derive_seed(seed, {3}));
    std::normal_distribution<double> normal(0.0, 1.0);
    d.mu_y = normal(rng);
    d.mu_X = random_mean_curve(rng, grid);
    d.mu_Z = random_mean_curve(rng, grid);
    d.base.array() += d.mu_y;
    RowMatrix X = d.X.values();
    X.rowwise() += d.mu_X.values().transpose();
    RowMatrix Z = d.Z.values();
    Z.rowwise() += d.mu_Z.values().transpose();
    d.X = FunctionalSeries(grid, std::move(X));
    d.Z = FunctionalSeries(grid, std::move(Z));
}

}  // namespace detail

/// kappa-free part of one replication of the design named by spec.family.
[[nodiscard]] inline DgpDraws draw(const DgpSpec& spec) {
    switch (spec.family) {
        case DgpFamily::BaselineNoIntercept: return detail::baseline_draws(spec);
        case DgpFamily::BaselineIntercept: {
            DgpDraws d = detail::baseline_draws(spec);
            detail::add_means(d, spec.seed);
            return d;
        }
        case DgpFamily::SeongComparison: return detail::seong_draws(spec);
    }
    throw InvalidArgument("simlab: unknown family");
}

[[nodiscard]] inline ScalarSeries respond(const DgpDraws& d, double kappa) {
    if (!(kappa >= 0.0)) throw InvalidArgument("respond: kappa must be >= 0");
    if (kappa == 0.0) return ScalarSeries(d.base);
    return ScalarSeries(d.base + (kappa * d.signal_scale) * d.signal);
}

[[nodiscard]] inline DgpSample sample_of(const DgpDraws& d, double kappa) {
    return {d.Z, respond(d, kappa), d.X, d.theta0, d.psi_bar, d.mu_y, d.mu_X, d.mu_Z};
}

[[nodiscard]] inline DgpSample gen_baseline(DgpSpec spec) {
    spec.family = DgpFamily::BaselineNoIntercept;
    return sample_of(draw(spec), spec.kappa);
}

[[nodiscard]] inline DgpSample gen_baseline_intercept(DgpSpec spec) {
    spec.family = DgpFamily::BaselineIntercept;
    return sample_of(draw(spec), spec.kappa);
}

[[nodiscard]] inline DgpSample gen_seong(const DgpSpec& spec) {
    if (spec.family != DgpFamily::SeongComparison) throw InvalidArgument("gen_seong: family must be SeongComparison");
    return sample_of(draw(spec), spec.kappa);
}

[[nodiscard]] inline DgpSample generate(const DgpSpec& spec) { return sample_of(draw(spec), spec.kappa); }

/// Test variant matching each design: uncentered for the mean-zero baseline,
/// centered whenever means are present.
[[nodiscard]] inline Variant natural_variant(DgpFamily f) {
    return f == DgpFamily::BaselineNoIntercept ? Variant::Plain : Variant::Intercept;
}

/// Long-run covariance of Z_t u_t and the drift curve E[Z_t <X_t, psi_bar>]
/// of the mean-zero baseline design with fixed structural parameters,
/// estimated from `chunks` independent stationary stretches of `chunk_length`.
struct PopulationMoments {
    HilbertOperator lambda_Zu;
    Curve c_xz_psi;
    std::size_t periods = 0;
};

[[nodiscard]] inline PopulationMoments population_moments(DgpSpec spec, std::size_t chunks, std::size_t chunk_length,
                                                          std::size_t lags = 0) {
    if (spec.family != DgpFamily::BaselineNoIntercept || !spec.params)
        throw InvalidArgument("population_moments: needs the mean-zero baseline with fixed params");
    if (chunks < 1 || chunk_length <= lags + 1) throw InvalidArgument("population_moments: bad chunk layout");
    const std::uint64_t base = spec.seed;
    spec.T = chunk_length;
    std::optional<Matrix> acc;
    std::optional<Vector> drift;
    std::optional<GridPtr> grid;
    std::size_t total = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
        spec.seed = derive_seed(base, {c});
        const DgpDraws d = draw(spec);
        const RowMatrix v = detail::scale_rows(d.Z.values(), d.base);
        Matrix k = v.transpose() * v;
        for (std::size_t s = 1; s <= lags; ++s) {
            const auto L = static_cast<Eigen::Index>(chunk_length - s);
            const Matrix g = v.bottomRows(L).transpose() * v.topRows(L);
            k += g + g.transpose();
        }
        const Vector dz = d.Z.values().transpose() * d.signal;
        if (!acc) {
            acc = k;
            drift = dz;
            grid = d.Z.grid();
        } else {
            *acc += k;
            *drift += dz;
        }
        total += chunk_length;
    }
    const double inv = 1.0 / static_cast<double>(total);
    Matrix K = *acc * inv;
    return {HilbertOperator(*grid, 0.5 * (K + K.transpose())), Curve(*grid, *drift * inv), total};
}

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentPlan {
    std::string label;
    std::vector<DgpSpec> dgps;          ///< kappa and seed are ignored
    std::vector<double> kappas{0.0};
    std::vector<std::string> kappa_labels;  ///< optional display labels
    std::vector<KernelSpec> kernels{KernelSpec::bartlett()};
    std::vector<WeightSpec> weights{WeightSpec::endpoint()};
    TestConfig test;                    ///< weight, kernel and seed are set per cell
    std::size_t replications = 2000;
    std::uint64_t base_seed = 1;
    std::size_t threads = 1;
};

struct CellResult {
    std::size_t dgp_index = 0;
    DgpFamily family = DgpFamily::BaselineNoIntercept;
    Design design = Design::Informative;
    double beta_u = 0.0;
    std::size_t T = 0;
    double kappa = 0.0;
    std::string kappa_label;
    std::string kernel;
    std::string weight;
    double drift_factor = 0.0;
    std::size_t rejections = 0;
    std::size_t completed = 0;  ///< replications that produced a decision
    std::size_t errors = 0;

    /// Rejection rate in percent.
    [[nodiscard]] double rate() const {
        return completed == 0 ? 0.0 : 100.0 * static_cast<double>(rejections) / static_cast<double>(completed);
    }
    /// Binomial Monte Carlo standard error in percentage points.
    [[nodiscard]] double se() const {
        if (completed == 0) return 0.0;
        const double r = rate() / 100.0;
        return 100.0 * std::sqrt(r * (1.0 - r) / static_cast<double>(completed));
    }
};

struct ExperimentReport {
    std::string label;
    std::size_t replications = 0;
    std::uint64_t base_seed = 0;
    std::size_t threads = 1;
    double runtime_seconds = 0.0;
    std::string variant;
    double alpha = 0.05;
    std::size_t mc_draws = 0;
    std::optional<std::size_t> d_T;
    DgpSettings settings;
    std::vector<CellResult> cells;

    /// First cell matching every given key; throws if none does.
    [[nodiscard]] const CellResult& find(Design design, double beta_u, std::size_t T, double kappa,
                                         std::string_view kernel, std::string_view weight) const {
        for (const auto& c : cells)
            if (c.design == design && std::abs(c.beta_u - beta_u) < 1e-12 && c.T == T &&
                std::abs(c.kappa - kappa) < 1e-12 && c.kernel == kernel && c.weight == weight)
                return c;
        throw InvalidArgument("ExperimentReport: no such cell");
    }
};

namespace detail {

enum Outcome : std::uint8_t { kAccept = 0, kReject = 1, kFailed = 2 };

inline void run_replication(const ExperimentPlan& plan, std::size_t g, std::size_t r, std::uint8_t* out) {
    DgpSpec spec = plan.dgps[g];
    spec.seed = derive_seed(plan.base_seed, {g, r});
    const std::size_t nw = plan.weights.size();
    const std::size_t per_kappa = plan.kernels.size() * nw;
    std::optional<DgpDraws> d;
    try {
        d.emplace(draw(spec));
    } catch (const Error&) {
        std::fill(out, out + plan.kappas.size() * per_kappa, kFailed);
        return;
    }
    TestConfig cfg = plan.test;
    cfg.seed = derive_seed(spec.seed, {7});
    for (std::size_t k = 0; k < plan.kappas.size(); ++k) {
        std::uint8_t* ok = out + k * per_kappa;
        std::optional<PreparedMoments> prep;
        try {
            TestInputs in{d->Z, respond(*d, plan.kappas[k]), {d->X}, {d->theta0}, {}};
            prep.emplace(prepare_moments(cfg.variant, in));
        } catch (const Error&) {
            std::fill(ok, ok + per_kappa, kFailed);
            continue;
        }
        for (std::size_t h = 0; h < plan.kernels.size(); ++h) {
            std::uint8_t* oh = ok + h * nw;
            cfg.kernel = plan.kernels[h];
            try {
                const Calibration cal = calibrate(prep->lrv_input, cfg);
                for (std::size_t w = 0; w < nw; ++w) {
                    try {
                        oh[w] = decide(cfg, plan.weights[w], prep->process, cal).reject ? kReject : kAccept;
                    } catch (const Error&) {
                        oh[w] = kFailed;
                    }
                }
            } catch (const Error&) {
                std::fill(oh, oh + nw, kFailed);
            }
        }
    }
}

}  // namespace detail

/// Rejection rates over the full grid dgps x kappas x kernels x weights.
/// Replication r of design g uses seed derive_seed(base_seed, {g, r}) and the
/// same Monte Carlo stream for every kappa, kernel and weight, so results do
/// not depend on the thread count.
[[nodiscard]] inline ExperimentReport run_experiment(const ExperimentPlan& plan) {
    if (plan.replications < 100) throw InvalidArgument("run_experiment: replications must be at least 100");
    if (plan.dgps.empty() || plan.kappas.empty() || plan.kernels.empty() || plan.weights.empty())
        throw InvalidArgument("run_experiment: empty experiment grid");
    if (!plan.kappa_labels.empty() && plan.kappa_labels.size() != plan.kappas.size())
        throw InvalidArgument("run_experiment: one label per kappa");
    plan.test.validate();
    for (const auto& d : plan.dgps) d.validate();

    const auto start = std::chrono::steady_clock::now();
    const std::size_t per_rep = plan.kappas.size() * plan.kernels.size() * plan.weights.size();
    const std::size_t R = plan.replications;
    ExperimentReport rep;
    rep.label = plan.label;
    rep.replications = R;
    rep.base_seed = plan.base_seed;
    rep.threads = std::max<std::size_t>(1, plan.threads);
    rep.variant = variant_name(plan.test.variant);
    rep.alpha = plan.test.alpha;
    rep.mc_draws = plan.test.mc_draws;
    rep.d_T = plan.test.d_T;
    rep.settings = plan.dgps.front().settings;

    std::vector<std::uint8_t> outcomes(R * per_rep);
    for (std::size_t g = 0; g < plan.dgps.size(); ++g) {
        auto work = [&](std::size_t first) {
            for (std::size_t r = first; r < R; r += rep.threads)
                detail::run_replication(plan, g, r, outcomes.data() + r * per_rep);
        };
        if (rep.threads == 1) {
            work(0);
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t t = 0; t < rep.threads; ++t) pool.emplace_back(work, t);
        }
        const DgpSpec& spec = plan.dgps[g];
        for (std::size_t k = 0; k < plan.kappas.size(); ++k)
            for (std::size_t h = 0; h < plan.kernels.size(); ++h)
                for (std::size_t w = 0; w < plan.weights.size(); ++w) {
                    CellResult c;
                    c.dgp_index = g;
                    c.family = spec.family;
                    c.design = spec.design;
                    c.beta_u = spec.beta_u;
                    c.T = spec.T;
                    c.kappa = plan.kappas[k];
                    c.kappa_label = plan.kappa_labels.empty() ? "" : plan.kappa_labels[k];
                    c.kernel = plan.kernels[h].name();
                    c.weight = plan.weights[w].name();
                    c.drift_factor = plan.weights[w].drift_factor();
                    const std::size_t off = (k * plan.kernels.size() + h) * plan.weights.size() + w;
                    for (std::size_t r = 0; r < R; ++r) {
                        const auto o = outcomes[r * per_rep + off];
                        if (o == detail::kFailed) {
                            ++c.errors;
                        } else {
                            ++c.completed;
                            c.rejections += o;
                        }
                    }
                    rep.cells.push_back(std::move(c));
                }
    }
    rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

/// Weights w(r) = r^p for the p values of the simulation tables, endpoint first.
[[nodiscard]] inline std::vector<WeightSpec> table_weights() {
    return {WeightSpec::endpoint(), WeightSpec::power(7), WeightSpec::power(3), WeightSpec::power(1),
            WeightSpec::power(0)};
}

/// Preset grids: "1" (exogeneity benchmark), "2" (baseline), "A4" (baseline
/// with intercept) and "3" (Seong comparison). `Ts` overrides the sample sizes.
[[nodiscard]] inline ExperimentPlan table_plan(std::string_view table, std::size_t replications, std::uint64_t seed,
                                               std::vector<std::size_t> Ts = {100, 200, 400}) {
    ExperimentPlan plan;
    plan.replications = replications;
    plan.base_seed = seed;
    plan.test.mc_draws = 1000;
    const auto add = [&](DgpFamily f, std::vector<Design> designs, std::vector<double> betas) {
        for (Design d : designs)
            for (double b : betas)
                for (std::size_t T : Ts) {
                    DgpSpec s;
                    s.family = f;
                    s.design = d;
                    s.beta_u = b;
                    s.T = T;
                    plan.dgps.push_back(s);
                }
    };
    if (table == "1") {
        plan.label = "table1";
        add(DgpFamily::BaselineNoIntercept, {Design::Informative}, {0.0, 0.1, 0.25});
        plan.kernels = {KernelSpec::bartlett(), KernelSpec::parzen()};
        plan.test.variant = Variant::ExogeneityBenchmark;
    } else if (table == "2" || table == "A4" || table == "a4") {
        const bool intercept = table != "2";
        plan.label = intercept ? "tableA4" : "table2";
        add(intercept ? DgpFamily::BaselineIntercept : DgpFamily::BaselineNoIntercept,
            {Design::Informative, Design::WeaklyInformative}, {0.1, 0.25});
        plan.kappas = {0.0, 5.0, 10.0, 20.0};
        plan.kernels = {KernelSpec::bartlett(), KernelSpec::parzen()};
        plan.weights = table_weights();
        plan.test.variant = intercept ? Variant::Intercept : Variant::Plain;
    } else if (table == "3") {
        plan.label = "table3";
        add(DgpFamily::SeongComparison, {Design::Informative, Design::WeaklyInformative}, {0.0});
        plan.kappas = {0.0, std::sqrt(0.05), std::sqrt(0.10), std::sqrt(0.15)};
        plan.kappa_labels = {"k2=0", "k2=0.05", "k2=0.10", "k2=0.15"};
        plan.kernels = {KernelSpec::parzen()};
        plan.test.variant = Variant::Intercept;
    } else {
        throw InvalidArgument("table_plan: unknown table '" + std::string(table) + "'");
    }
    return plan;
}

}  // namespace funflir
