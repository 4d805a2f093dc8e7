#pragma once

/// Named benchmark presets: complete Monte Carlo experiment definitions
/// (model, sample size, contamination scenarios, estimator set) so that the
/// standard comparison runs need no manual parameter entry.
///
/// The AR/ARMA coefficient vectors of the benchmark models are quoted in
/// characteristic-polynomial form, the convention the comparison tables are
/// printed in; they are negated here once into the regression form used by
/// the library (see types.hpp), and reports are negated back on output.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "robustarma/score.hpp"
#include "robustarma/sim.hpp"
#include "robustarma/types.hpp"

namespace robustarma {

/// Tuning constants of the two standard estimator variants: an
/// efficiency-leaning and a robustness-leaning choice of c1.
inline constexpr double kC1Efficient = 0.4050;
inline constexpr double kC1Robust = 0.8100;

/// A ready-to-run Monte Carlo experiment.
struct McPreset {
    std::string name;
    ArmaSpec spec;
    ArmaParams params;  ///< data-generating model, regression convention
    std::size_t n = 0;
    double innovation_sigma = 1.0;
    std::size_t default_runs = 100;
    /// Report coefficient means negated into characteristic-polynomial
    /// convention (the layout of the comparison tables).
    bool negate_for_report = true;
    std::vector<McScenario> scenarios;
    std::vector<McMethod> methods;
};

/// A ready-to-run maximum-bias-curve experiment (AR(1) only).
struct BiasPreset {
    std::string name;
    ArmaParams params;  ///< regression convention
    std::size_t n = 2000;
    std::size_t default_runs = 20;
    std::vector<double> eps_grid;
    std::vector<double> cw_grid;
    std::vector<double> alphas;  ///< quantile-curve percentages
};

namespace detail {

/// Stationary standard deviations of the clean benchmark processes
/// (obtained analytically from the long MA expansion with sigma = 1); the
/// outlier amplitudes of several scenarios are defined relative to them.
inline constexpr double kSigmaXAr4 = 27.5992262578;
inline constexpr double kSigmaXAr7 = 9.74760811557;

[[nodiscard]] inline std::vector<double> negated(std::vector<double> v) {
    for (double& x : v) x = -x;
    return v;
}

[[nodiscard]] inline McMethod robust_method(std::string name, double c1,
                                            std::optional<std::size_t> p_long,
                                            bool forward_backward,
                                            McMethod::Kind kind) {
    McMethod m;
    m.name = std::move(name);
    m.kind = kind;
    m.family = make_rho_family(c1);
    m.options.p_long = p_long;
    m.options.use_forward_backward = forward_backward;
    return m;
}

[[nodiscard]] inline McMethod ls_method(std::string name,
                                        McMethod::Kind kind) {
    McMethod m;
    m.name = std::move(name);
    m.kind = kind;
    return m;
}

[[nodiscard]] inline McScenario clean_scenario() {
    return {"clean", ContaminationSpec{}};
}

[[nodiscard]] inline McScenario outlier_scenario(std::string name,
                                                 ContaminationKind kind,
                                                 double epsilon,
                                                 TemporalPattern pattern,
                                                 std::size_t n_patch,
                                                 ContaminantDist dist) {
    McScenario sc;
    sc.name = std::move(name);
    sc.contamination.kind = kind;
    sc.contamination.epsilon = epsilon;
    sc.contamination.temporal = pattern;
    sc.contamination.n_patch = n_patch;
    sc.contamination.contaminant = dist;
    return sc;
}

[[nodiscard]] inline std::vector<McMethod> ar_method_set(
    std::optional<std::size_t> p_long) {
    return {
        ls_method("ML", McMethod::Kind::ls),
        ls_method("ML_3sigma", McMethod::Kind::ls_cleaned),
        robust_method("BIP_tau_c1rob", kC1Robust, p_long, false,
                      McMethod::Kind::bip_tau),
        robust_method("BIP_tau_c1eff", kC1Efficient, p_long, false,
                      McMethod::Kind::bip_tau),
        robust_method("BIP_tau_c1eff_fb", kC1Efficient, p_long, true,
                      McMethod::Kind::bip_tau),
    };
}

}  // namespace detail

/// The recognized preset names, in documentation order.
[[nodiscard]] inline std::vector<std::string> mc_preset_names() {
    return {"table3", "table4", "table5", "fig3"};
}

/** @brief Look up a Monte Carlo preset by name.
 *
 * table3 — AR(4), n=75: clean, one additive or replacement outlier
 *          (epsilon=0.0133, N(0,5^2)), and 20-sample positive patches of
 *          additive (|N(0,(5 sigma_x)^2)|) or replacement (|N(0,sigma_x^2)|)
 *          outliers (epsilon=0.2667).
 * table4 — AR(7), n=50: clean plus 1, 2, 3 isolated additive outliers
 *          (N(0,sigma_x^2)).
 * table5 — ARMA(4,4), n=1000: independent additive outliers N(0,10^2) at
 *          epsilon in {0, 0.05, 0.10, 0.25, 0.40}; AR(8) approximation for
 *          the starting point; includes the starting point as its own row.
 * fig3  — AR(1) phi_1=-0.5, n=1000: clean and 10% equally spaced additive
 *          outliers of constant amplitude 10.
 */
[[nodiscard]] inline McPreset mc_preset(const std::string& name) {
    using detail::outlier_scenario;
    McPreset ps;
    ps.name = name;
    if (name == "table3") {
        ps.spec = {4, 0};
        ps.params.phi = detail::negated({-2.7607, 3.8106, -2.6535, 0.9238});
        ps.n = 75;
        ps.default_runs = 200;
        const double sx = detail::kSigmaXAr4;
        ps.scenarios = {
            detail::clean_scenario(),
            outlier_scenario("AO1", ContaminationKind::AO, 0.0133,
                             TemporalPattern::isolated, 1,
                             ContaminantDist::normal(5.0)),
            outlier_scenario("RO1", ContaminationKind::RO, 0.0133,
                             TemporalPattern::isolated, 1,
                             ContaminantDist::normal(5.0)),
            outlier_scenario("PAO20", ContaminationKind::AO, 0.2667,
                             TemporalPattern::patchy, 20,
                             ContaminantDist::half_normal(5.0 * sx)),
            outlier_scenario("PRO20", ContaminationKind::RO, 0.2667,
                             TemporalPattern::patchy, 20,
                             ContaminantDist::half_normal(sx)),
        };
        ps.methods = detail::ar_method_set(std::nullopt);
    } else if (name == "table4") {
        ps.spec = {7, 0};
        ps.params.phi = detail::negated(
            {-3.5258, 6.9530, -9.3074, 8.9473, -6.1572, 2.8428, -0.7059});
        ps.n = 50;
        ps.default_runs = 100;
        const double sx = detail::kSigmaXAr7;
        ps.scenarios = {detail::clean_scenario()};
        const double eps[] = {0.02, 0.04, 0.06};
        for (int k = 0; k < 3; ++k) {
            ps.scenarios.push_back(outlier_scenario(
                "AO" + std::to_string(k + 1), ContaminationKind::AO, eps[k],
                TemporalPattern::isolated, 1, ContaminantDist::normal(sx)));
        }
        ps.methods = detail::ar_method_set(std::nullopt);
    } else if (name == "table5") {
        ps.spec = {4, 4};
        ps.params.phi = detail::negated({0.100, 1.6600, 0.0930, 0.8649});
        ps.params.theta = detail::negated({0.0226, 0.8175, 0.0595, 0.0764});
        ps.n = 1000;
        ps.default_runs = 100;
        ps.scenarios = {detail::clean_scenario()};
        for (const char* eps : {"0.05", "0.10", "0.25", "0.40"}) {
            ps.scenarios.push_back(outlier_scenario(
                std::string("AO_eps") + eps, ContaminationKind::AO,
                std::stod(eps), TemporalPattern::isolated, 1,
                ContaminantDist::normal(10.0)));
        }
        const std::optional<std::size_t> p_long = 8;
        ps.methods = {
            detail::ls_method("ML", McMethod::Kind::ls),
            detail::ls_method("ML_3sigma", McMethod::Kind::ls_cleaned),
            detail::robust_method("BIP_tau_c1rob", kC1Robust, p_long, false,
                                  McMethod::Kind::bip_tau),
            detail::robust_method("BIP_tau_c1eff", kC1Efficient, p_long,
                                  false, McMethod::Kind::bip_tau),
            detail::robust_method("BIP_tau_init", kC1Efficient, p_long, false,
                                  McMethod::Kind::bip_tau_init),
        };
    } else if (name == "fig3") {
        ps.spec = {1, 0};
        ps.params.phi = {-0.5};
        ps.n = 1000;
        ps.default_runs = 100;
        ps.negate_for_report = false;  // quoted directly in regression form
        ps.scenarios = {
            detail::clean_scenario(),
            outlier_scenario("AO10_spaced", ContaminationKind::AO, 0.10,
                             TemporalPattern::equally_spaced, 1,
                             ContaminantDist::constant(10.0)),
        };
        ps.methods = {
            detail::ls_method("ML", McMethod::Kind::ls),
            detail::ls_method("ML_3sigma", McMethod::Kind::ls_cleaned),
            detail::robust_method("BIP_tau_c1rob", kC1Robust, std::nullopt,
                                  false, McMethod::Kind::bip_tau),
            detail::robust_method("BIP_tau_c1eff", kC1Efficient, std::nullopt,
                                  false, McMethod::Kind::bip_tau),
        };
    } else {
        throw std::invalid_argument("unknown mc preset '" + name + "'");
    }
    return ps;
}

/** @brief Look up a bias-curve preset by name.
 *
 * fig4 — AR(1) phi_1=0.5 maximum-bias and quantile-bias curves over
 *        epsilon in {0.10..0.45} and point-mass amplitudes c_w in {1..12}
 *        (desk-scale sample size n=2000).
 */
[[nodiscard]] inline BiasPreset bias_preset(const std::string& name) {
    if (name != "fig4") {
        throw std::invalid_argument("unknown bias preset '" + name + "'");
    }
    BiasPreset ps;
    ps.name = name;
    ps.params.phi = {0.5};
    ps.n = 2000;
    ps.default_runs = 20;
    for (int e = 10; e <= 45; e += 5) ps.eps_grid.push_back(e / 100.0);
    for (int c = 1; c <= 12; ++c) ps.cw_grid.push_back(c);
    ps.alphas = {50.0, 75.0, 100.0};
    return ps;
}

/// Negate the phi/theta mean columns of a report in place (mu untouched),
/// converting regression-convention estimates to the
/// characteristic-polynomial layout of the comparison tables.  Standard
/// deviations are sign-invariant.
inline void negate_coefficient_means(McReport& report, std::size_t p,
                                     std::size_t q) {
    for (McScenarioResult& sc : report.scenarios) {
        for (McMethodStats& ms : sc.methods) {
            for (std::size_t k = 0; k < p + q && k < ms.mean.size(); ++k) {
                ms.mean[k] = -ms.mean[k];
            }
        }
    }
}

}  // namespace robustarma
