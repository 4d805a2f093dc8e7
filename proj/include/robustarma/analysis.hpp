#pragma once

/// Estimator analysis: the effective score function psi_tau, asymptotic
/// efficiency at the Gaussian model, the influence function of the AR(1)
/// coefficient under additive outliers, and tau-scale-based model order
/// selection.
///
/// Expectations are taken under the standard normal law with composite
/// Gauss-Legendre rules split at the score-function kink locations; plain
/// Gauss-Hermite rules are used only on axes where the integrand is smooth
/// (see quadrature.hpp for why).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "robustarma/ar.hpp"
#include "robustarma/quadrature.hpp"
#include "robustarma/scale.hpp"
#include "robustarma/score.hpp"
#include "robustarma/types.hpp"

namespace robustarma {

/// Finite-sample context for the effective score: the mixing weight Wn and
/// the M-scale, both computed from one residual set.
struct PsiTauContext {
    double wn = 0.0;
    double m_sigma = 1.0;
};

/** @brief Build the psi_tau context from a residual vector.
 *
 * Wn = sum[2*rho2(u) - psi2(u)u] / sum[psi1(u)u] with u = r / sigma_M.
 * A non-positive denominator (all residuals far outside the score support)
 * makes the estimating equation degenerate.
 */
[[nodiscard]] inline PsiTauContext make_psi_tau_context(
    const std::vector<double>& residuals, const RhoFamily& family) {
    const ScaleValue m = m_scale(residuals, family);
    PsiTauContext ctx;
    ctx.m_sigma = m.sigma;
    if (m.degenerate) {
        ctx.wn = 0.0;
        return ctx;
    }
    double num = 0.0, den = 0.0;
    for (double r : residuals) {
        const double u = r / m.sigma;
        num += 2.0 * family.rho2(u) - family.psi2(u) * u;
        den += family.psi1(u) * u;
    }
    if (!(den > 0.0)) {
        throw degenerate_weight_error(
            "psi_tau: non-positive weight denominator");
    }
    ctx.wn = num / den;
    return ctx;
}

/// Effective score psi_tau(x) = Wn * psi1(x) + psi2(x).
[[nodiscard]] inline double psi_tau(double x, const PsiTauContext& ctx,
                                    const RhoFamily& family) {
    return ctx.wn * family.psi1(x) + family.psi2(x);
}

/** @brief Population mixing weight: the Wn ratio with sums replaced by
 * standard-normal expectations (the asymptotic psi_tau uses it together
 * with sigma_M = 1).
 */
[[nodiscard]] inline double asymptotic_mixing_weight(const RhoFamily& family) {
    const double num = normal_expectation_segmented(
        [&](double z) { return 2.0 * family.rho2(z) - family.psi2(z) * z; },
        family.knots_rho2());
    const double den = normal_expectation_segmented(
        [&](double z) { return family.psi1(z) * z; }, family.knots_rho1());
    if (!(den > 0.0)) {
        throw degenerate_weight_error(
            "asymptotic psi_tau: non-positive weight denominator");
    }
    return num / den;
}

namespace detail {

struct AsymptoticPsiTau {
    const RhoFamily* family;
    double winf;
    double fd_step;

    [[nodiscard]] double operator()(double x) const {
        return winf * family->psi1(x) + family->psi2(x);
    }
    [[nodiscard]] double derivative(double x) const {
        return ((*this)(x + fd_step) - (*this)(x - fd_step)) /
               (2.0 * fd_step);
    }
};

}  // namespace detail

/** @brief Asymptotic efficiency at the Gaussian model:
 * EFF = E^2[psi_tau'(Z)] / E[psi_tau^2(Z)], normalized so that the
 * identity score (least squares) attains 1.
 */
[[nodiscard]] inline double asymptotic_efficiency(const RhoFamily& family,
                                                  double fd_step = 1e-5) {
    const detail::AsymptoticPsiTau psi{&family,
                                       asymptotic_mixing_weight(family),
                                       fd_step};
    const std::vector<double> knots = family.knots_all();
    const double e_prime = normal_expectation_segmented(
        [&](double z) { return psi.derivative(z); }, knots);
    const double e_sq = normal_expectation_segmented(
        [&](double z) { return psi(z) * psi(z); }, knots);
    return e_prime * e_prime / e_sq;
}

/// Influence of a point-mass additive outlier on the AR(1) coefficient.
struct IfCurve {
    std::vector<double> cw_grid;
    std::vector<double> if_values;
    double ges = 0.0;     ///< max |IF| over the grid
    double ges_cw = 0.0;  ///< grid point attaining the maximum
};

struct IfOptions {
    std::size_t hermite_nodes = 100;  ///< smooth-axis tensor resolution
    std::size_t segment_nodes = 64;   ///< per-segment Gauss-Legendre order
    double fd_step = 1e-5;            ///< psi_tau' central-difference step
    bool symmetrize = true;  ///< average the +-c_w point masses (else +c_w)
    double tail = 14.0;      ///< integration cut-off in standard deviations
};

/** @brief Influence function of the AR(1) coefficient under additive
 * point-mass outliers of amplitude c_w.
 *
 * IF(c_w) = (1 - phi^2) * E[(x0 + w0) psi_tau(a1 - phi*w0)] / E0 with
 * x0 ~ N(0, 1/(1-phi^2)), a1 ~ N(0,1) independent, w0 the point mass, and
 * E0 = E[nu^2 psi_tau'(u)] over independent standard normals.  The curve
 * is even in c_w: both outlier signs bias the coefficient identically.
 */
[[nodiscard]] inline IfCurve influence_function_ar1(
    double phi1, const std::vector<double>& cw_grid, const RhoFamily& family,
    const IfOptions& opts = {}) {
    if (!(std::abs(phi1) < 1.0)) {
        throw std::invalid_argument(
            "influence_function_ar1: requires |phi1| < 1");
    }
    const detail::AsymptoticPsiTau psi{&family,
                                       asymptotic_mixing_weight(family),
                                       opts.fd_step};
    const std::vector<double> base_knots = family.knots_all();
    std::vector<double> knots_pm;
    for (double k : base_knots) {
        knots_pm.push_back(k);
        knots_pm.push_back(-k);
    }

    const GaussHermiteRule hermite = gauss_hermite(opts.hermite_nodes);
    const double root2 = std::sqrt(2.0);
    const double inv_root_pi = 1.0 / std::sqrt(M_PI);

    // E0 = E[nu^2] * E[psi_tau'(u)]: literal tensor product, Hermite on the
    // polynomial nu axis, segmented rule on the kinked u axis.
    double e_nu2 = 0.0;
    for (std::size_t i = 0; i < hermite.nodes.size(); ++i) {
        const double nu = root2 * hermite.nodes[i];
        e_nu2 += hermite.weights[i] * nu * nu;
    }
    e_nu2 *= inv_root_pi;
    const double e_psi_prime = normal_expectation_knots(
        [&](double u) { return psi.derivative(u); }, knots_pm, -opts.tail,
        opts.tail, opts.segment_nodes);
    const double e0 = e_nu2 * e_psi_prime;
    if (std::abs(e0) < 1e-12) {
        throw std::runtime_error(
            "influence_function_ar1: singular denominator (E0 ~ 0)");
    }

    const double sd_x0 = 1.0 / std::sqrt(1.0 - phi1 * phi1);
    // inner(c) = E[(x0 + c)] * E[psi_tau(a - phi*c)]; the a-axis kinks sit
    // at the score knots shifted by phi*c.
    auto inner = [&](double c) {
        double e_x0_plus_c = 0.0;
        for (std::size_t i = 0; i < hermite.nodes.size(); ++i) {
            const double x0 = root2 * hermite.nodes[i] * sd_x0;
            e_x0_plus_c += hermite.weights[i] * (x0 + c);
        }
        e_x0_plus_c *= inv_root_pi;
        std::vector<double> shifted(knots_pm);
        for (double& k : shifted) k += phi1 * c;
        const double e_psi = normal_expectation_knots(
            [&](double a) { return psi(a - phi1 * c); }, shifted, -opts.tail,
            opts.tail, opts.segment_nodes);
        return e_x0_plus_c * e_psi;
    };

    IfCurve curve;
    curve.cw_grid = cw_grid;
    curve.if_values.reserve(cw_grid.size());
    for (double c : cw_grid) {
        const double e1 =
            opts.symmetrize ? 0.5 * (inner(c) + inner(-c)) : inner(c);
        curve.if_values.push_back((1.0 - phi1 * phi1) * e1 / e0);
    }
    for (std::size_t i = 0; i < curve.if_values.size(); ++i) {
        if (std::abs(curve.if_values[i]) > curve.ges) {
            curve.ges = std::abs(curve.if_values[i]);
            curve.ges_cw = curve.cw_grid[i];
        }
    }
    return curve;
}

/// Closed-form influence of a point-mass additive outlier on the
/// least-squares AR(1) estimate: IF_LS(c_w) = -phi * (1 - phi^2) * c_w^2.
[[nodiscard]] inline double ls_reference_if_ar1(double phi1, double cw) {
    return -phi1 * (1.0 - phi1 * phi1) * cw * cw;
}

/// Penalized-scale model order selection criteria.
enum class OrderCriterion { AIC, SIC, HQC };

[[nodiscard]] inline std::string to_string(OrderCriterion c) {
    switch (c) {
        case OrderCriterion::AIC: return "AIC";
        case OrderCriterion::SIC: return "SIC";
        case OrderCriterion::HQC: return "HQC";
    }
    return "?";
}

struct OrderSelection {
    std::size_t p_hat = 0;
    OrderCriterion criterion = OrderCriterion::SIC;
    std::vector<double> ic;         ///< criterion value per order 0..p_max
    std::vector<double> sigma_tau;  ///< robust scale per order
    std::vector<bool> available;    ///< false where the fit failed
};

/** @brief Select the AR order by minimizing
 * IC(p) = log(sigma_tau*(p)^2) + penalty(p, n) with the robust scale from
 * the recursive grid fit.  Penalties: AIC 2(p+1)/n, SIC log(n)p/n,
 * HQC 2 log(log n) p/n.
 */
[[nodiscard]] inline OrderSelection select_order(const Series& y,
                                                 std::size_t p_max,
                                                 OrderCriterion criterion,
                                                 const RhoFamily& family,
                                                 double grid_step = 0.05) {
    const std::size_t n = y.n();
    if (n <= 2 * p_max) {
        throw std::invalid_argument("select_order: series too short");
    }
    OrderSelection sel;
    sel.criterion = criterion;
    sel.ic.assign(p_max + 1, std::numeric_limits<double>::infinity());
    sel.sigma_tau.assign(p_max + 1, 0.0);
    sel.available.assign(p_max + 1, false);

    const auto nd = static_cast<double>(n);
    for (std::size_t p = 0; p <= p_max; ++p) {
        double sigma = 0.0;
        try {
            const ArFitTrace trace =
                estimate_ar_durbin_levinson(y, p, family, grid_step);
            sigma = trace.sigma_tau_star;
        } catch (const std::exception&) {
            continue;
        }
        if (!(sigma > 0.0)) continue;
        const auto pd = static_cast<double>(p);
        double penalty = 0.0;
        switch (criterion) {
            case OrderCriterion::AIC:
                penalty = 2.0 * (pd + 1.0) / nd;
                break;
            case OrderCriterion::SIC:
                penalty = std::log(nd) * pd / nd;
                break;
            case OrderCriterion::HQC:
                penalty = 2.0 * std::log(std::log(nd)) * pd / nd;
                break;
        }
        sel.sigma_tau[p] = sigma;
        sel.ic[p] = std::log(sigma * sigma) + penalty;
        sel.available[p] = true;
    }

    bool any = false;
    for (std::size_t p = 0; p <= p_max; ++p) {
        if (sel.available[p] && (!any || sel.ic[p] < sel.ic[sel.p_hat])) {
            sel.p_hat = p;
            any = true;
        }
    }
    if (!any) {
        throw std::runtime_error("select_order: every order failed to fit");
    }
    return sel;
}

}  // namespace robustarma
