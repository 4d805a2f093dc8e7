#pragma once

/// Full robust ARMA(p,q) estimation.
///
/// Pipeline: (1) robust AR(p_long) fit on the raw observations, used to
/// clean the series through the BIP reconstruction; (2) classical
/// Hannan-Rissanen long-AR regression (with a conditional-least-squares
/// refinement) on the cleaned series as starting point; (3) damped
/// weighted Gauss-Newton minimization of the innovations tau-scale for
/// the plain-ARMA and the BIP-ARMA branch; (4) the branch with the
/// smaller final scale wins, ties going to the plain-ARMA branch.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "robustarma/ar.hpp"
#include "robustarma/innovations.hpp"
#include "robustarma/polynomial.hpp"
#include "robustarma/scale.hpp"
#include "robustarma/score.hpp"
#include "robustarma/types.hpp"

namespace robustarma {

/// Options for the damped Gauss-Newton tau-scale minimizer.
struct MinimizeOptions {
    int max_iter = 200;
    double rel_tol = 1e-8;     ///< relative objective-change stop
    double step_tol = 1e-8;    ///< step-norm stop
    std::size_t q_long = 100;  ///< MA-infinity truncation for sigma(beta)
    double margin = 0.01;      ///< admissible-region margin for iterates
    double initial_damping = 1e-3;
    double fd_step = 1e-6;  ///< forward-difference Jacobian step factor
};

struct MinimizeResult {
    ArmaParams params;
    double sigma_tau = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Outcome of the full two-branch estimation.
struct EstimationResult {
    ArmaParams beta_star;        ///< selected parameters
    double sigma_tau_star = 0.0; ///< min of the two branch scales
    Branch branch = Branch::ARMA;
    ArmaParams beta_arma;
    ArmaParams beta_bip;
    double sigma_arma = 0.0;
    double sigma_bip = 0.0;
    ArmaParams start_point;
    int iterations = 0;
    bool converged = true;
};

struct EstimateOptions {
    std::optional<std::size_t> p_long;  ///< long-AR order; default 2(p+q)
    bool use_forward_backward = false;  ///< AR-only: Algorithm 2 instead of 1
    double grid_step = 0.05;
    std::size_t q_long = 100;
    double margin = 0.01;
    MinimizeOptions minimize;
};

namespace detail {

struct ObjectiveEval {
    std::vector<double> residuals;
    double m_sigma = 0.0;  ///< M-scale of the residuals
    double tau = 0.0;      ///< tau-scale of the residuals
    bool degenerate = false;
};

/// Branch residuals + tau-scale at one candidate; nullopt when the
/// candidate leaves the admissible region checked with `margin`.
[[nodiscard]] inline std::optional<ObjectiveEval> evaluate_objective(
    const Series& y, const ArmaParams& cand, Branch branch,
    const RhoFamily& family, double sigma_tau_y, std::size_t q_long,
    double margin) {
    if (!roots_within_margin(cand, margin)) return std::nullopt;
    ObjectiveEval out;
    if (branch == Branch::ARMA) {
        out.residuals = arma_residuals(y, cand, /*margin=*/0.0).values;
    } else {
        const double sigma_hat = sigma_from_ma_infinity(
            sigma_tau_y, cand, family, q_long, /*margin=*/0.0);
        out.residuals =
            bip_residuals(y, cand, std::max(sigma_hat, 1e-12), family,
                          /*margin=*/0.0).values;
    }
    const ScaleValue m = m_scale(out.residuals, family);
    out.m_sigma = m.sigma;
    out.degenerate = m.degenerate;
    out.tau = m.degenerate ? 0.0 : tau_scale(out.residuals, m.sigma, family);
    return out;
}

/// Branch residuals at a candidate already known to be stationary; used
/// for finite-difference Jacobian columns (no margin check).
[[nodiscard]] inline std::vector<double> evaluate_unchecked_residuals(
    const Series& y, const ArmaParams& cand, Branch branch,
    const RhoFamily& family, double sigma_tau_y, std::size_t q_long) {
    if (branch == Branch::ARMA) {
        return arma_residuals(y, cand, /*margin=*/0.0).values;
    }
    const double sigma_hat = sigma_from_ma_infinity(sigma_tau_y, cand, family,
                                                    q_long, /*margin=*/0.0);
    return bip_residuals(y, cand, std::max(sigma_hat, 1e-12), family,
                         /*margin=*/0.0)
        .values;
}

[[nodiscard]] inline ArmaParams params_from_vector(
    const Eigen::VectorXd& x, std::size_t p, std::size_t q, double mu) {
    ArmaParams out;
    out.phi.assign(x.data(), x.data() + p);
    out.theta.assign(x.data() + p, x.data() + p + q);
    out.mu = mu;
    return out;
}

/// Weight of the tau-estimating-equation psi at standardized residual u:
/// psi_tau(u)/u with psi_tau = Wn*psi1 + psi2, continuous at u = 0.
[[nodiscard]] inline double tau_weight(double u, double wn,
                                       const RhoFamily& family) {
    if (std::abs(u) < 1e-10) {
        return wn / (family.c1 * family.c1) + 1.0;
    }
    return (wn * family.psi1(u) + family.psi2(u)) / u;
}

/// Data-dependent mixing weight Wn between the two score functions.
[[nodiscard]] inline double tau_mixing_weight(const std::vector<double>& u,
                                              const RhoFamily& family) {
    double num = 0.0, den = 0.0;
    for (double v : u) {
        num += 2.0 * family.rho2(v) - family.psi2(v) * v;
        den += family.psi1(v) * v;
    }
    if (!(den > 1e-12 * static_cast<double>(u.size()))) return 0.0;
    return num / den;
}

}  // namespace detail

/** @brief Minimize the squared tau-scale of the branch residuals by a
 * damped, weighted Gauss-Newton iteration.
 *
 * The Jacobian of the residual vector is formed by forward finite
 * differences (step 1e-6 * max(1, |beta_i|)); residuals are weighted by
 * psi_tau(u)/u at the current iterate.  Steps that leave the admissible
 * region or increase the objective are rejected with tenfold damping.
 * In the BIP branch the innovations-scale estimate sigma(beta) is
 * refreshed for every candidate, including finite-difference evaluations.
 */
[[nodiscard]] inline MinimizeResult minimize_tau_objective(
    const Series& y, const ArmaParams& start, Branch branch,
    const RhoFamily& family, const MinimizeOptions& opts = {}) {
    const std::size_t p = start.p();
    const std::size_t q = start.q();
    const std::size_t k = p + q;
    if (!roots_within_margin(start, opts.margin)) {
        throw std::invalid_argument(
            "minimize_tau_objective: start outside the admissible region");
    }

    // tau-scale of the centred observations, cached for sigma(beta).
    std::vector<double> centered(y.values);
    for (double& v : centered) v -= start.mu;
    const ScaleValue my = m_scale(centered, family);
    const double sigma_tau_y =
        my.degenerate ? 0.0 : tau_scale(centered, my.sigma, family);

    auto evaluate = [&](const ArmaParams& cand) {
        return detail::evaluate_objective(y, cand, branch, family,
                                          sigma_tau_y, opts.q_long,
                                          opts.margin);
    };

    Eigen::VectorXd x(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < p; ++i) x(static_cast<Eigen::Index>(i)) = start.phi[i];
    for (std::size_t j = 0; j < q; ++j) x(static_cast<Eigen::Index>(p + j)) = start.theta[j];

    auto current = evaluate(start);
    if (!current) {
        throw std::invalid_argument(
            "minimize_tau_objective: start outside the admissible region");
    }
    MinimizeResult result;
    result.params = start;
    result.sigma_tau = current->tau;
    if (k == 0 || current->degenerate) {
        result.converged = true;
        return result;
    }

    const auto n_res = static_cast<Eigen::Index>(current->residuals.size());
    double damping = opts.initial_damping;
    double objective = current->tau * current->tau;

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        result.iterations = iter + 1;

        // Forward-difference Jacobian of the residual vector; if the
        // forward perturbation leaves the stationarity region, fall back
        // to a backward step for that coordinate.
        Eigen::MatrixXd jac(n_res, static_cast<Eigen::Index>(k));
        bool jac_ok = true;
        for (std::size_t j = 0; j < k; ++j) {
            const double h =
                opts.fd_step *
                std::max(1.0, std::abs(x(static_cast<Eigen::Index>(j))));
            bool filled = false;
            for (double sign : {1.0, -1.0}) {
                Eigen::VectorXd xp = x;
                xp(static_cast<Eigen::Index>(j)) += sign * h;
                const ArmaParams cand =
                    detail::params_from_vector(xp, p, q, start.mu);
                if (!roots_within_margin(cand, 0.0)) continue;
                const auto pert = detail::evaluate_unchecked_residuals(
                    y, cand, branch, family, sigma_tau_y, opts.q_long);
                for (Eigen::Index i = 0; i < n_res; ++i) {
                    jac(i, static_cast<Eigen::Index>(j)) =
                        sign * (pert[static_cast<std::size_t>(i)] -
                                current->residuals[static_cast<std::size_t>(i)]) /
                        h;
                }
                filled = true;
                break;
            }
            if (!filled) {
                jac_ok = false;
                break;
            }
        }
        if (!jac_ok) break;

        // Residual weights at the current iterate.
        std::vector<double> u(current->residuals.size());
        const double s = std::max(current->m_sigma, 1e-12);
        for (std::size_t i = 0; i < u.size(); ++i) {
            u[i] = current->residuals[i] / s;
        }
        const double wn = detail::tau_mixing_weight(u, family);
        Eigen::VectorXd w(n_res);
        for (Eigen::Index i = 0; i < n_res; ++i) {
            w(i) = std::max(
                detail::tau_weight(u[static_cast<std::size_t>(i)], wn, family),
                0.0);
        }

        const Eigen::MatrixXd jtw = jac.transpose() * w.asDiagonal();
        const Eigen::MatrixXd normal = jtw * jac;
        Eigen::VectorXd grad(static_cast<Eigen::Index>(k));
        {
            Eigen::VectorXd r(n_res);
            for (Eigen::Index i = 0; i < n_res; ++i) {
                r(i) = current->residuals[static_cast<std::size_t>(i)];
            }
            grad = jtw * r;
        }

        bool accepted = false;
        double step_norm = 0.0;
        while (damping <= 1e12) {
            Eigen::MatrixXd damped = normal;
            for (Eigen::Index d = 0; d < damped.rows(); ++d) {
                damped(d, d) += damping * (normal(d, d) + 1e-12);
            }
            const Eigen::VectorXd delta = damped.ldlt().solve(-grad);
            const Eigen::VectorXd xc = x + delta;
            const ArmaParams cand =
                detail::params_from_vector(xc, p, q, start.mu);
            const auto trial = evaluate(cand);
            if (trial && trial->tau * trial->tau < objective) {
                x = xc;
                current = trial;
                step_norm = delta.norm();
                accepted = true;
                damping = std::max(damping * 0.1, 1e-12);
                break;
            }
            damping *= 10.0;
        }
        if (!accepted) break;  // fully damped without descent

        const double new_objective = current->tau * current->tau;
        const bool small_change =
            objective - new_objective < opts.rel_tol * objective;
        objective = new_objective;
        if (small_change || step_norm < opts.step_tol ||
            current->degenerate) {
            result.converged = true;
            break;
        }
    }

    result.params = detail::params_from_vector(x, p, q, start.mu);
    result.sigma_tau = current->tau;
    if (opts.max_iter == 0) result.converged = true;
    return result;
}

namespace detail {

/// OLS solve of X b = z; returns empty vector when X is rank deficient.
[[nodiscard]] inline std::vector<double> ols_solve(const Eigen::MatrixXd& x,
                                                   const Eigen::VectorXd& z) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < x.cols()) return {};
    const Eigen::VectorXd b = qr.solve(z);
    return std::vector<double>(b.data(), b.data() + b.size());
}

/// Two-stage Hannan-Rissanen regression for ARMA(p,q) on a centred series.
/// Returns (phi, theta) or empty vectors when the regression is singular.
inline bool hannan_rissanen(const std::vector<double>& z, std::size_t p,
                            std::size_t q, std::vector<double>& phi,
                            std::vector<double>& theta) {
    const std::size_t n = z.size();
    const std::size_t p_hr = std::max(
        2 * (p + q),
        static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n)))));
    if (n <= p_hr + q + p + 1 || n <= 2 * p_hr) return false;

    // Stage 1: long-AR fit, residuals as innovation proxies.
    std::vector<double> ahat(n, 0.0);
    {
        const std::size_t rows = n - p_hr;
        Eigen::MatrixXd x(static_cast<Eigen::Index>(rows),
                          static_cast<Eigen::Index>(p_hr));
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows));
        for (std::size_t t = p_hr; t < n; ++t) {
            for (std::size_t i = 1; i <= p_hr; ++i) {
                x(static_cast<Eigen::Index>(t - p_hr),
                  static_cast<Eigen::Index>(i - 1)) = z[t - i];
            }
            rhs(static_cast<Eigen::Index>(t - p_hr)) = z[t];
        }
        const std::vector<double> c = ols_solve(x, rhs);
        if (c.empty()) return false;
        for (std::size_t t = p_hr; t < n; ++t) {
            double pred = 0.0;
            for (std::size_t i = 1; i <= p_hr; ++i) pred += c[i - 1] * z[t - i];
            ahat[t] = z[t] - pred;
        }
    }

    // Stage 2: regression on p observation lags and q residual lags.
    const std::size_t t0 = std::max(p, p_hr + q);
    const std::size_t rows = n - t0;
    const std::size_t k = p + q;
    if (rows <= k) return false;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows),
                      static_cast<Eigen::Index>(k));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows));
    for (std::size_t t = t0; t < n; ++t) {
        const auto row = static_cast<Eigen::Index>(t - t0);
        for (std::size_t i = 1; i <= p; ++i) {
            x(row, static_cast<Eigen::Index>(i - 1)) = z[t - i];
        }
        for (std::size_t j = 1; j <= q; ++j) {
            x(row, static_cast<Eigen::Index>(p + j - 1)) = ahat[t - j];
        }
        rhs(row) = z[t];
    }
    const std::vector<double> b = ols_solve(x, rhs);
    if (b.empty()) return false;
    phi.assign(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(p));
    theta.resize(q);
    for (std::size_t j = 0; j < q; ++j) theta[j] = -b[p + j];
    return true;
}

/// Plain OLS AR(p) fit on a centred series (fallback starting point).
[[nodiscard]] inline std::vector<double> ols_ar(const std::vector<double>& z,
                                                std::size_t p) {
    const std::size_t n = z.size();
    if (p == 0 || n <= 2 * p) return std::vector<double>(p, 0.0);
    const std::size_t rows = n - p;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows),
                      static_cast<Eigen::Index>(p));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows));
    for (std::size_t t = p; t < n; ++t) {
        for (std::size_t i = 1; i <= p; ++i) {
            x(static_cast<Eigen::Index>(t - p),
              static_cast<Eigen::Index>(i - 1)) = z[t - i];
        }
        rhs(static_cast<Eigen::Index>(t - p)) = z[t];
    }
    std::vector<double> c = ols_solve(x, rhs);
    if (c.empty()) c.assign(p, 0.0);
    return c;
}

}  // namespace detail

/** @brief Classical ARMA(p,q) fit: Hannan-Rissanen two-stage regression
 * followed by a conditional-least-squares refinement, projected into the
 * admissible region.  Used on cleaned data for the robust starting point
 * and on raw data for the least-squares baseline.
 */
[[nodiscard]] inline ArmaParams classical_arma_fit(const Series& y,
                                                   const ArmaSpec& spec,
                                                   double mu,
                                                   double margin = 0.01,
                                                   bool* used_fallback = nullptr) {
    if (used_fallback) *used_fallback = false;
    std::vector<double> z(y.values);
    for (double& v : z) v -= mu;

    ArmaParams fit;
    fit.mu = mu;
    if (spec.p + spec.q == 0) return fit;

    if (!detail::hannan_rissanen(z, spec.p, spec.q, fit.phi, fit.theta)) {
        fit.phi = detail::ols_ar(z, spec.p);
        fit.theta.assign(spec.q, 0.0);
        if (used_fallback) *used_fallback = true;
    }
    fit = shrink_into_margin(fit, margin);

    // Conditional-least-squares refinement: the tau objective under the
    // quadratic score family is the residual root mean square.
    static const RhoFamily quad = make_quadratic_family();
    MinimizeOptions polish;
    polish.margin = margin;
    const MinimizeResult refined =
        minimize_tau_objective(y, fit, Branch::ARMA, quad, polish);
    return refined.params;
}

/** @brief Robust starting point for the nonlinear ARMA estimation.
 *
 * Fits a robust long AR model, cleans the observations through its BIP
 * reconstruction, runs the classical fit on the cleaned series, and
 * projects the result into the admissible region.
 */
[[nodiscard]] inline ArmaParams robust_starting_point(
    const Series& y, const ArmaSpec& spec, const RhoFamily& family,
    std::optional<std::size_t> p_long_opt = std::nullopt,
    double grid_step = 0.05, std::size_t q_long = 100, double margin = 0.01,
    bool* used_fallback = nullptr) {
    const std::size_t p_long =
        p_long_opt.value_or(std::max<std::size_t>(2 * (spec.p + spec.q), 1));
    if (y.n() <= 2 * p_long) {
        throw std::invalid_argument(
            "robust_starting_point: series too short for the long AR fit");
    }
    const ArFitTrace trace =
        estimate_ar_durbin_levinson(y, p_long, family, grid_step, q_long);
    ArmaParams ar_fit;
    ar_fit.phi = trace.phi;
    ar_fit.mu = trace.mu;
    const Series cleaned = bip_clean(
        y, ar_fit, std::max(trace.sigma_hat, 1e-12), family, /*margin=*/0.0);
    return classical_arma_fit(cleaned, spec, trace.mu, margin, used_fallback);
}

/** @brief Full BIP tau-estimate of an ARMA(p,q) model.
 *
 * Pure AR specs delegate to the recursive grid algorithm (forward-backward
 * variant on request).  Otherwise both branch objectives are minimized
 * from the robust starting point and the smaller final scale wins; exact
 * ties select the plain-ARMA branch.
 */
[[nodiscard]] inline EstimationResult estimate_bip_tau(
    const Series& y, const ArmaSpec& spec, const RhoFamily& family,
    const EstimateOptions& opts = {}) {
    if (y.n() <= spec.p + spec.q) {
        throw std::invalid_argument("estimate_bip_tau: series too short");
    }

    EstimationResult out;
    if (spec.q == 0) {
        const ArFitTrace trace =
            opts.use_forward_backward
                ? estimate_ar_forward_backward(y, spec.p, family,
                                               opts.grid_step, opts.q_long)
                : estimate_ar_durbin_levinson(y, spec.p, family,
                                              opts.grid_step, opts.q_long);
        ArmaParams params;
        params.phi = trace.phi;
        params.mu = trace.mu;
        out.beta_star = params;
        out.beta_arma = params;
        out.beta_bip = params;
        out.sigma_arma = trace.sigma_arma_final;
        out.sigma_bip = trace.sigma_bip_final;
        out.sigma_tau_star = trace.sigma_tau_star;
        out.branch = trace.branch_star;
        out.start_point = params;
        out.iterations = 0;
        out.converged = true;
        return out;
    }

    MinimizeOptions min_opts = opts.minimize;
    min_opts.q_long = opts.q_long;
    min_opts.margin = opts.margin;

    out.start_point = robust_starting_point(y, spec, family, opts.p_long,
                                            opts.grid_step, opts.q_long,
                                            opts.margin);
    const MinimizeResult fit_arma = minimize_tau_objective(
        y, out.start_point, Branch::ARMA, family, min_opts);
    const MinimizeResult fit_bip = minimize_tau_objective(
        y, out.start_point, Branch::BIP, family, min_opts);

    out.beta_arma = fit_arma.params;
    out.beta_bip = fit_bip.params;
    out.sigma_arma = fit_arma.sigma_tau;
    out.sigma_bip = fit_bip.sigma_tau;
    out.iterations = fit_arma.iterations + fit_bip.iterations;
    out.converged = fit_arma.converged && fit_bip.converged;
    if (fit_bip.sigma_tau < fit_arma.sigma_tau) {
        out.branch = Branch::BIP;
        out.beta_star = fit_bip.params;
        out.sigma_tau_star = fit_bip.sigma_tau;
    } else {
        out.branch = Branch::ARMA;
        out.beta_star = fit_arma.params;
        out.sigma_tau_star = fit_arma.sigma_tau;
    }
    return out;
}

}  // namespace robustarma
