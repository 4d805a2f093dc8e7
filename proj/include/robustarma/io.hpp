#pragma once

/// Plain-text data exchange: single-column series files, CSV report tables,
/// and JSON report trees.  Every floating-point value is written with enough
/// digits to round-trip exactly, so identical inputs produce byte-identical
/// artifacts.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "robustarma/analysis.hpp"
#include "robustarma/sim.hpp"
#include "robustarma/types.hpp"

namespace robustarma {

/// Malformed input data (distinct from usage errors so the CLI can map it
/// to its own exit code).
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, std::size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_ = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline bool parse_double(const std::string& text, double& out) {
    const char* begin = text.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end != begin && *end == '\0';
}

}  // namespace detail

/// Shortest exact decimal form of a double ("%.17g" survives the
/// text -> double round trip bit-for-bit).
[[nodiscard]] inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/** @brief Read a series from a one-value-per-line file.
 *
 * A single non-numeric first content line is treated as a column header and
 * skipped; blank lines are ignored; any other non-numeric row is an error.
 */
[[nodiscard]] inline Series read_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open '" + path + "'", 0);
    Series y;
    std::string raw;
    std::size_t line_no = 0;
    bool header_allowed = true;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string text = detail::trim(raw);
        if (text.empty()) continue;
        double v = 0.0;
        if (!detail::parse_double(text, v)) {
            if (header_allowed) {
                header_allowed = false;
                continue;
            }
            throw parse_error("non-numeric value '" + text + "' in '" + path + "'",
                              line_no);
        }
        header_allowed = false;
        y.values.push_back(v);
    }
    if (y.values.empty()) {
        throw parse_error("no numeric data in '" + path + "'", line_no);
    }
    return y;
}

/// Write a series one value per line at full precision.
inline void write_series(const std::string& path, const Series& y) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    for (double v : y.values) out << format_full(v) << '\n';
}

/// Column labels phi1..phip, theta1..thetaq, mu matching the row layout of
/// McMethodStats vectors.
[[nodiscard]] inline std::vector<std::string> parameter_names(std::size_t p,
                                                              std::size_t q) {
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= p; ++i) names.push_back("phi" + std::to_string(i));
    for (std::size_t j = 1; j <= q; ++j) names.push_back("theta" + std::to_string(j));
    names.emplace_back("mu");
    return names;
}

/// Monte Carlo report as CSV: one row per scenario x method x parameter.
inline void write_mc_csv(std::ostream& out, const McReport& report,
                         std::size_t p, std::size_t q) {
    const std::vector<std::string> names = parameter_names(p, q);
    out << "scenario,method,parameter,mean,sd,runs_used,runs_failed\n";
    for (const McScenarioResult& sc : report.scenarios) {
        for (const McMethodStats& ms : sc.methods) {
            for (std::size_t k = 0; k < names.size(); ++k) {
                out << sc.name << ',' << ms.name << ',' << names[k] << ','
                    << format_full(k < ms.mean.size() ? ms.mean[k] : 0.0) << ','
                    << format_full(k < ms.sd.size() ? ms.sd[k] : 0.0) << ','
                    << ms.runs_used << ',' << ms.runs_failed << '\n';
            }
        }
    }
}

/// Monte Carlo report as a JSON tree nested by scenario.
[[nodiscard]] inline nlohmann::json mc_to_json(const McReport& report,
                                               std::size_t p, std::size_t q) {
    const std::vector<std::string> names = parameter_names(p, q);
    nlohmann::json root;
    root["runs"] = report.runs;
    root["n"] = report.n;
    root["seed"] = report.seed;
    root["scenarios"] = nlohmann::json::array();
    for (const McScenarioResult& sc : report.scenarios) {
        nlohmann::json js;
        js["name"] = sc.name;
        js["methods"] = nlohmann::json::array();
        for (const McMethodStats& ms : sc.methods) {
            nlohmann::json jm;
            jm["name"] = ms.name;
            jm["runs_used"] = ms.runs_used;
            jm["runs_failed"] = ms.runs_failed;
            jm["high_failure_rate"] = ms.high_failure_rate;
            nlohmann::json jmean = nlohmann::json::object();
            nlohmann::json jsd = nlohmann::json::object();
            for (std::size_t k = 0; k < names.size(); ++k) {
                jmean[names[k]] = k < ms.mean.size() ? ms.mean[k] : 0.0;
                jsd[names[k]] = k < ms.sd.size() ? ms.sd[k] : 0.0;
            }
            jm["mean"] = jmean;
            jm["sd"] = jsd;
            js["methods"].push_back(jm);
        }
        root["scenarios"].push_back(js);
    }
    return root;
}

/// Maximum-bias summary: one row per contamination fraction with the MBC
/// and each quantile curve.
inline void write_bias_summary_csv(std::ostream& out, const BiasCurves& bc) {
    out << "epsilon,mbc";
    for (double a : bc.alphas) out << ",qbc" << format_full(a);
    out << '\n';
    for (std::size_t e = 0; e < bc.eps_grid.size(); ++e) {
        out << format_full(bc.eps_grid[e]) << ',' << format_full(bc.mbc[e]);
        for (std::size_t a = 0; a < bc.alphas.size(); ++a) {
            out << ',' << format_full(bc.qbc[a][e]);
        }
        out << '\n';
    }
}

/// Full (epsilon, c_w) maximum-bias surface, long format.
inline void write_bias_surface_csv(std::ostream& out, const BiasCurves& bc) {
    out << "epsilon,cw,max_abs_bias\n";
    for (std::size_t e = 0; e < bc.eps_grid.size(); ++e) {
        for (std::size_t c = 0; c < bc.cw_grid.size(); ++c) {
            out << format_full(bc.eps_grid[e]) << ',' << format_full(bc.cw_grid[c])
                << ',' << format_full(bc.max_bias_surface[e][c]) << '\n';
        }
    }
}

/// Influence curve with the unbounded least-squares reference alongside.
inline void write_if_csv(std::ostream& out, const IfCurve& curve, double phi1) {
    out << "cw,if_tau,if_ls\n";
    for (std::size_t i = 0; i < curve.cw_grid.size(); ++i) {
        const double c = curve.cw_grid[i];
        out << format_full(c) << ',' << format_full(curve.if_values[i]) << ','
            << format_full(ls_reference_if_ar1(phi1, c)) << '\n';
    }
}

/// Order-selection table: criterion value and robust scale per candidate p.
inline void write_order_csv(std::ostream& out, const OrderSelection& sel) {
    out << "p,sigma_tau,ic,available\n";
    for (std::size_t p = 0; p < sel.ic.size(); ++p) {
        out << p << ',' << format_full(sel.sigma_tau[p]) << ','
            << (sel.available[p] ? format_full(sel.ic[p]) : std::string("nan"))
            << ',' << (sel.available[p] ? 1 : 0) << '\n';
    }
}

/// Convenience file-writing wrapper around the stream serializers.
template <typename WriteFn>
inline void write_text_file(const std::string& path, WriteFn&& fn) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    fn(out);
}

}  // namespace robustarma
