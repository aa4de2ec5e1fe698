#pragma once

// JSON and fixed-width text renderings of test results and experiment reports.

#include "funflir/simlab.hpp"
#include "funflir/testkit.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace funflir {

using json = nlohmann::json;

[[nodiscard]] inline json to_json(const TestResult& r) {
    return {
        {"statistic", r.statistic},
        {"critical_value", r.critical_value},
        {"p_value", r.p_value},
        {"reject", r.reject},
        {"alpha", r.alpha},
        {"eigenvalues", r.eigenvalues},
        {"bandwidth", r.bandwidth},
        {"d_T", r.d_T},
        {"T", r.T},
        {"mc_draws", r.mc_draws},
        {"seed", r.seed},
        {"variant", r.variant},
        {"kernel", r.kernel},
        {"weight", r.weight},
        {"drift_factor", r.drift_factor},
        {"diagnostics",
         {{"andrews_alpha", r.andrews_alpha},
          {"degenerate_spectrum", r.degenerate_spectrum},
          {"fpca_rank_deficient", r.fpca_rank_deficient},
          {"spectrum_padded", r.spectrum_padded},
          {"spectrum_clipped", r.spectrum_clipped}}},
    };
}

[[nodiscard]] inline std::string summary(const TestResult& r) {
    std::ostringstream os;
    os << "variant " << r.variant << ", weight " << r.weight << ", kernel " << r.kernel << " (h = " << r.bandwidth
       << ", d_T = " << r.d_T << ")\n";
    os << "statistic " << r.statistic << ", critical value " << r.critical_value << " at alpha " << r.alpha
       << ", p-value " << r.p_value << "\n";
    os << (r.reject ? "reject" : "do not reject") << " H0";
    if (r.degenerate_spectrum) os << " (moment process identically zero)";
    os << "\n";
    return os.str();
}

[[nodiscard]] inline json to_json(const ExperimentReport& rep) {
    json cells = json::array();
    for (const auto& c : rep.cells) {
        json j = {{"family", family_name(c.family)},
                  {"design", design_name(c.design)},
                  {"beta_u", c.beta_u},
                  {"T", c.T},
                  {"kappa", c.kappa},
                  {"kernel", c.kernel},
                  {"weight", c.weight},
                  {"drift_factor", c.drift_factor},
                  {"rejections", c.rejections},
                  {"completed", c.completed},
                  {"errors", c.errors},
                  {"rate", c.rate()},
                  {"se", c.se()}};
        if (!c.kappa_label.empty()) j["kappa_label"] = c.kappa_label;
        cells.push_back(std::move(j));
    }
    json settings = {{"grid_points", rep.settings.grid_points}, {"j_max", rep.settings.j_max},
                     {"burn_in", rep.settings.burn_in},         {"v_scale", rep.settings.v_scale},
                     {"vartheta", rep.settings.vartheta},       {"eta_tilde_scale", rep.settings.eta_tilde_scale}};
    return {{"label", rep.label},
            {"replications", rep.replications},
            {"base_seed", rep.base_seed},
            {"threads", rep.threads},
            {"runtime_seconds", rep.runtime_seconds},
            {"variant", rep.variant},
            {"alpha", rep.alpha},
            {"mc_draws", rep.mc_draws},
            {"d_T", rep.d_T ? json(*rep.d_T) : json("auto")},
            {"settings", settings},
            {"cells", cells}};
}

/// Rows (design, T, weight), columns (beta_u, kernel, kappa), rates in percent.
[[nodiscard]] inline std::string format_table(const ExperimentReport& rep) {
    using RowKey = std::tuple<std::string, std::string, std::size_t, std::string>;
    using ColKey = std::tuple<double, std::string, double>;
    std::vector<RowKey> rows;
    std::vector<ColKey> cols;
    std::map<ColKey, std::string> col_label;
    std::map<std::pair<RowKey, ColKey>, double> value;
    for (const auto& c : rep.cells) {
        RowKey rk{family_name(c.family), design_name(c.design), c.T, c.weight};
        ColKey ck{c.beta_u, c.kernel, c.kappa};
        if (std::find(rows.begin(), rows.end(), rk) == rows.end()) rows.push_back(rk);
        if (std::find(cols.begin(), cols.end(), ck) == cols.end()) {
            cols.push_back(ck);
            std::ostringstream os;
            os << "b=" << c.beta_u << "/" << c.kernel.substr(0, 4) << "/";
            if (c.kappa_label.empty())
                os << "k=" << c.kappa;
            else
                os << c.kappa_label;
            col_label[ck] = os.str();
        }
        value[{rk, ck}] = c.rate();
    }
    std::size_t width = 7;
    for (const auto& [k, l] : col_label) width = std::max(width, l.size() + 1);

    std::ostringstream os;
    char buf[64];
    os << rep.label << ": rejection rates (%), " << rep.replications << " replications, seed " << rep.base_seed
       << ", variant " << rep.variant << "\n";
    std::snprintf(buf, sizeof buf, "%-20s %-12s %5s %-9s", "design", "", "T", "weight");
    os << buf;
    for (const auto& ck : cols) os << std::string(width - col_label[ck].size(), ' ') << col_label[ck];
    os << "\n";
    for (const auto& rk : rows) {
        std::snprintf(buf, sizeof buf, "%-20s %-12s %5zu %-9s", std::get<0>(rk).c_str(), std::get<1>(rk).c_str(),
                      std::get<2>(rk), std::get<3>(rk).c_str());
        os << buf;
        for (const auto& ck : cols) {
            const auto it = value.find({rk, ck});
            if (it == value.end())
                std::snprintf(buf, sizeof buf, "%*s", static_cast<int>(width), "-");
            else
                std::snprintf(buf, sizeof buf, "%*.1f", static_cast<int>(width), it->second);
            os << buf;
        }
        os << "\n";
    }
    std::snprintf(buf, sizeof buf, "runtime %.1f s\n", rep.runtime_seconds);
    os << buf;
    return os.str();
}

}  // namespace funflir
