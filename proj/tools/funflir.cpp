// funflir command-line interface: test | simulate | power | transform.
//
// Exit codes: 0 ok, 1 error raised by the library (bad data, degenerate
// spectrum, ...), 2 usage error (unknown flag, invalid config key or value).

#include "funflir/funflir.hpp"
#include "funflir/report.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using funflir::json;

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw funflir::Error(path + ": cannot read file for digest");
    return sha256_hex(std::string(std::istreambuf_iterator<char>(in), {}));
}

/// "endpoint", "inf", "p=7", "p7" or a bare number.
funflir::WeightSpec parse_weight(std::string s) {
    if (s == "endpoint" || s == "inf" || s == "p=inf" || s == "pinf") return funflir::WeightSpec::endpoint();
    if (s.rfind("p=", 0) == 0)
        s = s.substr(2);
    else if (!s.empty() && s[0] == 'p')
        s = s.substr(1);
    std::size_t used = 0;
    double p = 0.0;
    try {
        p = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw CLI::ValidationError("--weight", "expected endpoint or a power p >= 0");
    return funflir::WeightSpec::power(p);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

struct Common {
    std::uint64_t seed = 0;
    std::string out;
    std::string config_path;
};

struct Manifest {
    json inputs = json::object();
    json config = json::object();
    std::uint64_t seed = 0;
    json digests = json::object();

    [[nodiscard]] json to_json(const std::string& command) const {
        return {{"command", command}, {"inputs", inputs},  {"config", config},
                {"seed", seed},       {"version", funflir::kVersion}, {"output_digests", digests}};
    }
};

void add_input(Manifest& m, const std::string& role, const std::string& path) {
    m.inputs[role] = {{"path", path}, {"sha256", file_digest(path)}};
}

/// Writes {"command", "result", "manifest"} to --out or stdout. The manifest
/// carries the SHA-256 of the compact serialization of "result".
void emit(const std::string& command, const json& result, Manifest& m, const Common& c) {
    m.digests["result"] = sha256_hex(result.dump());
    const json doc = {{"command", command}, {"result", result}, {"manifest", m.to_json(command)}};
    if (c.out.empty()) {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::ofstream f(c.out);
        if (!f) throw funflir::Error(c.out + ": cannot write output");
        f << doc.dump(2) << "\n";
    }
}

/// Splices the `key = value` lines of --config into the argument list, right
/// after the subcommand, as `--key value`. Keys also given on the command line
/// are skipped; unknown keys surface as unknown flags.
std::vector<std::string> with_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw CLI::FileError::Missing(path);

    const auto given = [&](const std::string& flag) {
        return std::any_of(args.begin(), args.end(),
                           [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    };
    const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::vector<std::string> extra;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw CLI::ConversionError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        if (key.empty() || key == "config")
            throw CLI::ConversionError(path + ":" + std::to_string(lineno) + ": invalid key '" + key + "'");
        if (given("--" + key)) continue;
        extra.push_back("--" + key);
        extra.push_back(value);
    }
    const auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) {
        return a == "test" || a == "simulate" || a == "power" || a == "transform";
    });
    if (sub == args.end()) return args;
    args.insert(sub + 1, extra.begin(), extra.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Identification-robust tests for the slope of an endogenous functional linear regression"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(funflir::kVersion));
    Common common;

    // ---- test
    auto* test = app.add_subcommand("test", "Test H0: theta = theta0 on data files");
    std::string z_path, y_path, variant = "plain", weight = "endpoint", kernel = "bartlett", dT = "auto",
                bandwidth = "auto";
    std::vector<std::string> x_paths, theta_args, cov_paths;
    double alpha = 0.05;
    std::size_t draws = 500000;
    test->add_option("--Z", z_path, "auxiliary curves (CSV, header = grid)");
    test->add_option("--y", y_path, "response (single-column CSV)")->required();
    test->add_option("--X", x_paths, "regressor curves; repeat for the multi variant")->required();
    test->add_option("--theta0", theta_args, "null slope: curve file or 'zero'; one per --X");
    test->add_option("--covariates", cov_paths, "scalar covariate files (covariates variant)");
    test->add_option("--variant", variant, "plain | intercept | covariates | multi | exogeneity")
        ->check(CLI::IsMember({"plain", "intercept", "covariates", "multi", "exogeneity"}));
    test->add_option("--weight", weight, "endpoint or power p (w(r) = r^p)");
    test->add_option("--kernel", kernel, "bartlett | parzen | tukey-hanning")
        ->check(CLI::IsMember({"bartlett", "parzen", "tukey-hanning"}));
    test->add_option("--alpha", alpha, "nominal level")->check(CLI::Range(1e-6, 0.999999));
    test->add_option("--dT", dT, "eigenvalues kept, or 'auto' for 5 + ceil(T^0.333)");
    test->add_option("--bandwidth", bandwidth, "kernel bandwidth, or 'auto' (Andrews)");
    test->add_option("--draws", draws, "Monte Carlo draws for the critical value")->check(CLI::Range(100, 100000000));

    // ---- simulate
    auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo table");
    std::string table = "2", t_list, format = "json";
    std::size_t reps = 2000, threads = 1, sim_draws = 1000;
    sim->add_option("--table", table, "1 | 2 | 3 | A4")->check(CLI::IsMember({"1", "2", "3", "A4", "a4"}));
    sim->add_option("--reps", reps, "replications per cell")->check(CLI::Range(100, 100000000));
    sim->add_option("--T", t_list, "comma-separated sample sizes (default 100,200,400)");
    sim->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
    sim->add_option("--draws", sim_draws, "Monte Carlo draws per critical value")->check(CLI::Range(100, 100000000));
    sim->add_option("--format", format, "json | text")->check(CLI::IsMember({"json", "text"}));

    // ---- power
    auto* pow = app.add_subcommand("power", "Local asymptotic power curves for the baseline design");
    std::string weights_list = "p0,p7,endpoint", kappa_list = "0,5,10,20", design = "informative";
    double beta_u = 0.1, p_alpha = 0.05;
    std::size_t chunks = 20, chunk_length = 5000, p_draws = 100000;
    pow->add_option("--weights", weights_list, "comma-separated weights");
    pow->add_option("--kappas", kappa_list, "comma-separated kappa values");
    pow->add_option("--beta-u", beta_u, "endogeneity strength");
    pow->add_option("--design", design, "informative | weak")->check(CLI::IsMember({"informative", "weak"}));
    pow->add_option("--alpha", p_alpha, "nominal level")->check(CLI::Range(1e-6, 0.999999));
    pow->add_option("--chunks", chunks, "independent stretches for the population moments")->check(CLI::Range(1, 100000));
    pow->add_option("--chunk-length", chunk_length, "periods per stretch")->check(CLI::Range(100, 10000000));
    pow->add_option("--draws", p_draws, "Monte Carlo draws")->check(CLI::Range(100, 100000000));

    // ---- transform
    auto* tr = app.add_subcommand("transform", "Transform a density CSV into functional regressors");
    std::string dens_path, kind = "clr", moments_out;
    std::size_t moments_k = 4;
    tr->add_option("--input", dens_path, "density CSV (header = support grid on [a,b])")->required();
    tr->add_option("--kind", kind, "clr | lhr | lrhr | lcdf | pdf | qf")
        ->check(CLI::IsMember({"clr", "lhr", "lrhr", "lcdf", "pdf", "qf"}));
    tr->add_option("--moments-out", moments_out, "also write standardized moments (CSV)");
    tr->add_option("--moments", moments_k, "number of moments (1..4)")->check(CLI::Range(1, 4));

    for (auto* sub : {test, sim, pow, tr}) {
        sub->add_option("--seed", common.seed, "random seed (falls back to FUNFLIR_SEED)")->envname("FUNFLIR_SEED");
        sub->add_option("--out", common.out, tr == sub ? "output CSV" : "output JSON file (default stdout)");
        sub->add_option("--config", common.config_path, "file of 'key = value' lines; command-line flags win");
    }
    tr->get_option("--out")->required();

    try {
        auto args = with_config(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    Manifest m;
    m.seed = common.seed;
    try {
        if (!common.config_path.empty()) add_input(m, "config", common.config_path);
        if (*test) {
            funflir::TestConfig cfg;
            cfg.variant = funflir::variant_from_name(variant);
            cfg.weight = parse_weight(weight);
            cfg.kernel = funflir::KernelSpec::from_name(kernel);
            cfg.alpha = alpha;
            cfg.mc_draws = draws;
            cfg.seed = common.seed;
            if (dT != "auto") cfg.d_T = static_cast<std::size_t>(std::stoul(dT));
            if (bandwidth != "auto") cfg.bandwidth = std::stod(bandwidth);

            funflir::TestInputs in{std::nullopt, funflir::load_scalars(y_path), {}, {}, {}};
            add_input(m, "y", y_path);
            if (!z_path.empty()) {
                in.Z = funflir::load_curves(z_path);
                add_input(m, "Z", z_path);
            }
            for (std::size_t k = 0; k < x_paths.size(); ++k) {
                in.Xs.push_back(funflir::load_curves(x_paths[k]));
                add_input(m, "X" + std::to_string(k + 1), x_paths[k]);
            }
            if (theta_args.empty()) theta_args.assign(in.Xs.size(), "zero");
            if (theta_args.size() != in.Xs.size()) throw CLI::ValidationError("--theta0", "need one null slope per --X");
            for (std::size_t k = 0; k < theta_args.size(); ++k) {
                if (theta_args[k] == "zero") {
                    in.theta0s.push_back(funflir::Curve::zero(in.Xs[k].grid()));
                } else {
                    in.theta0s.push_back(funflir::load_curve(theta_args[k]));
                    add_input(m, "theta0_" + std::to_string(k + 1), theta_args[k]);
                }
            }
            for (std::size_t k = 0; k < cov_paths.size(); ++k) {
                in.covariates.push_back(funflir::load_scalars(cov_paths[k]));
                add_input(m, "covariate" + std::to_string(k + 1), cov_paths[k]);
            }
            m.config = {{"variant", variant}, {"weight", cfg.weight.name()}, {"kernel", kernel}, {"alpha", alpha},
                        {"dT", dT},           {"bandwidth", bandwidth},      {"draws", draws}};
            const auto r = funflir::run_test(cfg, in);
            std::cerr << funflir::summary(r);
            emit("test", funflir::to_json(r), m, common);
        } else if (*sim) {
            std::vector<std::size_t> Ts{100, 200, 400};
            if (!t_list.empty()) {
                Ts.clear();
                for (const auto& s : split_list(t_list)) Ts.push_back(std::stoul(s));
            }
            auto plan = funflir::table_plan(table, reps, common.seed, Ts);
            plan.threads = threads;
            plan.test.mc_draws = sim_draws;
            m.config = {{"table", table}, {"reps", reps}, {"T", Ts}, {"threads", threads}, {"draws", sim_draws}};
            const auto rep = funflir::run_experiment(plan);
            std::cerr << funflir::format_table(rep);
            if (format == "text") {
                const std::string text = funflir::format_table(rep);
                m.digests["text"] = sha256_hex(text);
                if (common.out.empty()) {
                    std::cout << text;
                } else {
                    std::ofstream(common.out) << text;
                }
                std::cout << m.to_json("simulate").dump(2) << "\n";
            } else {
                json result = funflir::to_json(rep);
                result.erase("runtime_seconds");  // keeps the digest reproducible
                result["threads"] = 1;
                emit("simulate", result, m, common);
            }
        } else if (*pow) {
            funflir::DgpSpec spec;
            spec.beta_u = beta_u;
            spec.design = design == "weak" ? funflir::Design::WeaklyInformative : funflir::Design::Informative;
            spec.seed = common.seed;
            spec.params = funflir::draw_params(spec);
            const auto pm = funflir::population_moments(spec, chunks, chunk_length);
            const auto eig = funflir::sym_eig(pm.lambda_Zu, true);
            std::vector<double> lambdas;
            std::vector<funflir::Curve> vecs;
            for (std::size_t j = 0; j < eig.values.size(); ++j) {
                lambdas.push_back(std::max(0.0, eig.values[j]));
                vecs.push_back(eig.vectors[j]);
            }
            std::vector<double> kappas;
            for (const auto& s : split_list(kappa_list)) kappas.push_back(std::stod(s));
            json curves = json::array();
            for (const auto& wname : split_list(weights_list)) {
                const auto w = parse_weight(wname);
                json powers = json::array();
                for (std::size_t k = 0; k < kappas.size(); ++k) {
                    const auto shift = pm.c_xz_psi * (kappas[k] * w.drift_factor());
                    powers.push_back(funflir::local_power(lambdas, vecs, shift, p_alpha, p_draws,
                                                          funflir::derive_seed(common.seed, {k})));
                }
                curves.push_back({{"weight", w.name()}, {"drift_factor", w.drift_factor()}, {"power", powers}});
            }
            m.config = {{"weights", weights_list}, {"kappas", kappas}, {"beta_u", beta_u}, {"design", design},
                        {"alpha", p_alpha},        {"chunks", chunks}, {"chunk_length", chunk_length},
                        {"draws", p_draws}};
            const json result = {{"kappas", kappas}, {"alpha", p_alpha}, {"curves", curves},
                                 {"c_xz_psi_norm", funflir::norm(pm.c_xz_psi)},
                                 {"lambda_trace", pm.lambda_Zu.trace()}};
            for (const auto& c : curves) {
                std::cerr << c["weight"].get<std::string>() << " (D_w " << c["drift_factor"].get<double>() << "):";
                for (const auto& p : c["power"]) std::cerr << " " << p.get<double>();
                std::cerr << "\n";
            }
            emit("power", result, m, common);
        } else if (*tr) {
            const auto d = funflir::load_density(dens_path);
            add_input(m, "density", dens_path);
            for (auto t : d.renormalized())
                std::cerr << "warning: period " << t + 1 << " did not integrate to 1 and was renormalized\n";
            std::size_t floored = 0;
            const auto X = funflir::transform(d, funflir::transform_from_name(kind), &floored);
            if (floored > 0)
                std::cerr << "warning: " << floored << " values were raised to the log floor " << funflir::kLogFloor
                          << "\n";
            funflir::write_curves(common.out, X);
            m.digests[common.out] = file_digest(common.out);
            if (!moments_out.empty()) {
                const auto mom = funflir::standardized_moments(d, moments_k);
                std::vector<double> header;
                for (std::size_t k = 1; k <= moments_k; ++k) header.push_back(static_cast<double>(k));
                funflir::write_matrix_csv(moments_out, header, mom);
                m.digests[moments_out] = file_digest(moments_out);
            }
            m.config = {{"kind", kind}, {"moments", moments_k}, {"log_floor_hits", floored}};
            std::cout << m.to_json("transform").dump(2) << "\n";
        }
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const funflir::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: invalid number (" << e.what() << ")\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: number out of range (" << e.what() << ")\n";
        return 2;
    }
    return 0;
}
