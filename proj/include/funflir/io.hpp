#pragma once

// CSV input and output. Curve files carry the grid in the header row and one
// period per line; scalar files hold a single column with an optional header.
// Values are written with 17 significant digits so that a round trip is exact.

#include "funflir/density.hpp"
#include "funflir/errors.hpp"
#include "funflir/hilbert.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace funflir {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view cell, double& out) {
    cell = trim(cell);
    if (cell.empty()) return false;
    const std::string tmp(cell);
    char* end = nullptr;
    errno = 0;
    out = std::strtod(tmp.c_str(), &end);
    return end == tmp.c_str() + tmp.size() && errno != ERANGE && std::isfinite(out);
}

inline std::string where(const std::string& path, std::size_t line) {
    return path + ": row " + std::to_string(line);
}

struct CsvTable {
    std::vector<double> header;
    RowMatrix rows;
};

// Numeric CSV whose first line is a numeric header of `width` columns.
inline CsvTable read_numeric_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::string line;
    std::size_t lineno = 0;
    CsvTable t;
    std::vector<std::vector<double>> data;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<double> vals;
        std::string_view rest(line);
        std::size_t col = 0;
        while (true) {
            const auto comma = rest.find(',');
            const auto cell = rest.substr(0, comma);
            ++col;
            double v = 0.0;
            if (!parse_double(cell, v)) {
                const auto c = trim(cell);
                throw ParseError(where(path, lineno) + ", column " + std::to_string(col) +
                                 (c.empty() ? ": missing value" : ": not a finite number '" + std::string(c) + "'"));
            }
            vals.push_back(v);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (!have_header) {
            t.header = std::move(vals);
            have_header = true;
            continue;
        }
        if (vals.size() != t.header.size())
            throw ParseError(where(path, lineno) + ": expected " + std::to_string(t.header.size()) + " values, found " +
                             std::to_string(vals.size()));
        data.push_back(std::move(vals));
    }
    if (!have_header) throw ParseError(path + ": empty file");
    for (std::size_t i = 1; i < t.header.size(); ++i)
        if (!(t.header[i] > t.header[i - 1])) throw ParseError(path + ": grid header must be strictly increasing");
    t.rows.resize(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(t.header.size()));
    for (std::size_t r = 0; r < data.size(); ++r)
        for (std::size_t c = 0; c < t.header.size(); ++c)
            t.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = data[r][c];
    return t;
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

[[nodiscard]] inline FunctionalSeries load_curves(const std::string& path) {
    auto t = detail::read_numeric_csv(path);
    if (t.rows.rows() < 2) throw ParseError(path + ": need at least 2 periods");
    GridPtr grid;
    try {
        grid = Grid::from_points(t.header);
    } catch (const InvalidArgument& e) {
        throw ParseError(path + ": bad grid header (" + e.what() + ")");
    }
    return {grid, std::move(t.rows)};
}

[[nodiscard]] inline ScalarSeries load_scalars(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::string line;
    std::size_t lineno = 0;
    std::vector<double> vals;
    while (std::getline(in, line)) {
        ++lineno;
        const auto cell = detail::trim(line);
        if (cell.empty()) continue;
        if (cell.find(',') != std::string_view::npos)
            throw ParseError(detail::where(path, lineno) + ": expected a single column");
        double v = 0.0;
        if (!detail::parse_double(cell, v)) {
            if (vals.empty() && lineno == 1) continue;  // header
            throw ParseError(detail::where(path, lineno) + ": not a finite number '" + std::string(cell) + "'");
        }
        vals.push_back(v);
    }
    if (vals.empty()) throw ParseError(path + ": no values");
    return ScalarSeries(Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size())));
}

/// Density file: header = support grid on [a,b], one density per row.
[[nodiscard]] inline DensitySample load_density(const std::string& path) {
    auto t = detail::read_numeric_csv(path);
    if (t.rows.rows() < 1) throw ParseError(path + ": no densities");
    return {std::move(t.header), std::move(t.rows)};
}

inline void write_matrix_csv(const std::string& path, const std::vector<double>& header, const RowMatrix& rows) {
    std::ofstream out(path);
    if (!out) throw Error(path + ": cannot write file");
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << detail::format_double(header[i]);
    out << "\n";
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        for (Eigen::Index c = 0; c < rows.cols(); ++c) out << (c ? "," : "") << detail::format_double(rows(r, c));
        out << "\n";
    }
    if (!out) throw Error(path + ": write failed");
}

inline void write_curves(const std::string& path, const FunctionalSeries& X) {
    write_matrix_csv(path, X.grid()->points(), X.values());
}

inline void write_scalars(const std::string& path, const ScalarSeries& y, const std::string& header = "") {
    std::ofstream out(path);
    if (!out) throw Error(path + ": cannot write file");
    if (!header.empty()) out << header << "\n";
    for (Eigen::Index t = 0; t < y.values().size(); ++t) out << detail::format_double(y.values()(t)) << "\n";
    if (!out) throw Error(path + ": write failed");
}

/// A single curve from a one-row curve file (header = grid).
[[nodiscard]] inline Curve load_curve(const std::string& path) {
    auto t = detail::read_numeric_csv(path);
    if (t.rows.rows() != 1) throw ParseError(path + ": expected exactly one curve");
    return {Grid::from_points(t.header), t.rows.row(0).transpose()};
}

}  // namespace funflir
