#pragma once

/// Residual (innovations) reconstruction for ARMA and BIP-ARMA models.
///
/// The BIP recursion feeds back *clipped* past innovations, so a single
/// corrupted observation perturbs at most r = max(p, q) subsequent
/// residuals instead of propagating through the whole series.  With the
/// identity nonlinearity the two recursions coincide exactly, which the
/// tests exploit as a consistency check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "robustarma/polynomial.hpp"
#include "robustarma/scale.hpp"
#include "robustarma/score.hpp"
#include "robustarma/types.hpp"

namespace robustarma {

namespace detail {

inline void check_residual_inputs(const Series& y, const ArmaParams& params,
                                  double margin) {
    if (y.n() <= params.p()) {
        throw std::invalid_argument(
            "residuals: series length must exceed AR order");
    }
    if (!roots_within_margin(params, margin)) {
        throw outside_parameter_region(
            "residuals: parameters outside the admissible stationarity/"
            "invertibility region");
    }
}

}  // namespace detail

/** @brief Reconstruct ARMA innovations a_t for t = p+1..n.
 *
 * Applies
 *   a_t = y_t - mu - sum_i phi_i (y_{t-i} - mu) + sum_j theta_j a_{t-j}
 * with pre-sample innovations (t <= p) set to zero.  Output length n - p.
 */
[[nodiscard]] inline Residuals arma_residuals(const Series& y,
                                              const ArmaParams& params,
                                              double margin = 0.01) {
    detail::check_residual_inputs(y, params, margin);
    const std::size_t n = y.n();
    const std::size_t p = params.p();
    const std::size_t q = params.q();
    const double mu = params.mu;

    // a[t] for t = 0..n-1 in series indexing; entries before p stay 0 so the
    // theta feedback can index uniformly.
    std::vector<double> a(n, 0.0);
    for (std::size_t t = p; t < n; ++t) {
        double v = y[t] - mu;
        for (std::size_t i = 1; i <= p; ++i) {
            v -= params.phi[i - 1] * (y[t - i] - mu);
        }
        for (std::size_t j = 1; j <= q; ++j) {
            v += (t >= j) ? params.theta[j - 1] * a[t - j] : 0.0;
        }
        a[t] = v;
    }

    Residuals out;
    out.values.assign(a.begin() + static_cast<std::ptrdiff_t>(p), a.end());
    out.branch = Branch::ARMA;
    return out;
}

/** @brief Reconstruct BIP-ARMA innovations a_t^b for t = p+1..n.
 *
 * Applies
 *   a_t^b = y_t - mu - sum_i phi_i (y_{t-i} - mu)
 *           + sum_{i=1}^r [ phi_i a_{t-i}^b + (theta_i - phi_i) sigma
 *                           eta(a_{t-i}^b / sigma) ]
 * with r = max(p, q), phi_i = 0 for i > p, theta_i = 0 for i > q, and
 * pre-sample innovations set to zero.  When eta is the identity this equals
 * arma_residuals exactly.
 */
[[nodiscard]] inline Residuals bip_residuals(const Series& y,
                                             const ArmaParams& params,
                                             double sigma,
                                             const RhoFamily& family,
                                             double margin = 0.01) {
    detail::check_residual_inputs(y, params, margin);
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("bip_residuals: sigma must be positive");
    }
    const std::size_t n = y.n();
    const std::size_t p = params.p();
    const std::size_t q = params.q();
    const std::size_t r = std::max(p, q);
    const double mu = params.mu;

    std::vector<double> a(n, 0.0);
    for (std::size_t t = p; t < n; ++t) {
        double v = y[t] - mu;
        for (std::size_t i = 1; i <= p; ++i) {
            v -= params.phi[i - 1] * (y[t - i] - mu);
        }
        for (std::size_t i = 1; i <= r; ++i) {
            if (t < i) continue;  // pre-sample term is zero
            const double phi_i = (i <= p) ? params.phi[i - 1] : 0.0;
            const double theta_i = (i <= q) ? params.theta[i - 1] : 0.0;
            const double prev = a[t - i];
            v += phi_i * prev +
                 (theta_i - phi_i) * sigma * family.eta(prev / sigma);
        }
        a[t] = v;
    }

    Residuals out;
    out.values.assign(a.begin() + static_cast<std::ptrdiff_t>(p), a.end());
    out.branch = Branch::BIP;
    out.sigma_used = sigma;
    return out;
}

/** @brief Backward innovations for a pure AR(p) model.
 *
 * ARMA branch (time-reversed prediction errors), for t = p+1..n:
 *   a_t^bw = y_{t-p} - mu - sum_i phi_i (y_{t-p+i} - mu)
 * BIP branch, iterated downward for t = n-p-1, ..., p+1 with the p
 * future-side terms at the series end initialised to zero:
 *   a_t^bw = y_{t-p} - mu - sum_i phi_i (y_{t-p+i} - mu)
 *            + sum_i phi_i [ a_{t+i}^bw - sigma eta(a_{t+i}^bw / sigma) ]
 *
 * For p = 0 both branches reduce to the centred series itself.
 * Requires q = 0; the backward recursion is defined for AR models only.
 */
[[nodiscard]] inline Residuals ar_backward_residuals(
    const Series& y, const ArmaParams& params, Branch branch,
    std::optional<double> sigma, const RhoFamily& family,
    double margin = 0.01) {
    if (params.q() != 0) {
        throw std::invalid_argument(
            "ar_backward_residuals: defined for AR models only (q = 0)");
    }
    const std::size_t n = y.n();
    const std::size_t p = params.p();
    const double mu = params.mu;

    if (p == 0) {
        Residuals out;
        out.values.resize(n);
        for (std::size_t t = 0; t < n; ++t) out.values[t] = y[t] - mu;
        out.branch = branch;
        if (branch == Branch::BIP) {
            if (!sigma || !(*sigma > 0.0)) {
                throw std::invalid_argument(
                    "ar_backward_residuals: BIP branch requires sigma > 0");
            }
            out.sigma_used = *sigma;
        }
        return out;
    }

    if (n <= 2 * p) {
        throw std::invalid_argument(
            "ar_backward_residuals: series length must exceed 2p");
    }
    if (!roots_within_margin(params, margin)) {
        throw outside_parameter_region(
            "ar_backward_residuals: parameters outside the admissible "
            "region");
    }

    // Unclipped backward prediction errors; e[j] corresponds to t = p+1+j,
    // i.e. e[j] = y[j] - mu - sum_i phi_i (y[j+i] - mu), j = 0..n-p-1.
    auto backward_error = [&](std::size_t j) {
        double v = y[j] - mu;
        for (std::size_t i = 1; i <= p; ++i) {
            v -= params.phi[i - 1] * (y[j + i] - mu);
        }
        return v;
    };

    Residuals out;
    out.branch = branch;
    if (branch == Branch::ARMA) {
        out.values.resize(n - p);
        for (std::size_t j = 0; j < n - p; ++j) {
            out.values[j] = backward_error(j);
        }
        return out;
    }

    if (!sigma || !(*sigma > 0.0) || !std::isfinite(*sigma)) {
        throw std::invalid_argument(
            "ar_backward_residuals: BIP branch requires sigma > 0");
    }
    const double s = *sigma;
    // BIP backward range t = p+1..n-p-1, i.e. m = n-2p-1 values, filled from
    // the top down so each step can reference the p already-computed (or
    // zero-initialised) future values.
    const std::size_t m = n - 2 * p - 1;
    if (m == 0) {
        throw std::invalid_argument(
            "ar_backward_residuals: series too short for the BIP backward "
            "recursion (need n >= 2p + 2)");
    }
    std::vector<double> a(m, 0.0);
    for (std::size_t idx = m; idx-- > 0;) {
        double v = backward_error(idx);
        for (std::size_t i = 1; i <= p; ++i) {
            if (idx + i >= m) continue;  // future-side pre-sample is zero
            const double nxt = a[idx + i];
            v += params.phi[i - 1] * (nxt - s * family.eta(nxt / s));
        }
        a[idx] = v;
    }
    out.values = std::move(a);
    out.sigma_used = s;
    return out;
}

/** @brief Innovations-scale estimate from the MA-infinity representation.
 *
 * sigma^2(beta) = tau(y)^2 / (1 + kappa^2 * sum_{i=1}^{q_long} lambda_i^2)
 * where tau(y) is the tau-scale of the centred observations and lambda are
 * the MA-infinity coefficients of theta(B)/phi(B).  The overload taking the
 * precomputed tau-scale lets estimators cache it once per series.
 */
[[nodiscard]] inline double sigma_from_ma_infinity(double sigma_tau_y,
                                                   const ArmaParams& params,
                                                   const RhoFamily& family,
                                                   std::size_t q_long = 100,
                                                   double margin = 0.01) {
    const std::vector<double> lambda =
        ma_infinity_coeffs(params, q_long, margin);
    double sum_sq = 0.0;
    for (double l : lambda) sum_sq += l * l;
    return sigma_tau_y / std::sqrt(1.0 + family.kappa2 * sum_sq);
}

[[nodiscard]] inline double sigma_from_ma_infinity(const Series& y,
                                                   const ArmaParams& params,
                                                   const RhoFamily& family,
                                                   std::size_t q_long = 100,
                                                   double margin = 0.01) {
    std::vector<double> centered(y.values);
    for (double& v : centered) v -= params.mu;
    const ScaleValue m = m_scale(centered, family);
    const double tau = tau_scale(centered, m.sigma, family);
    return sigma_from_ma_infinity(tau, params, family, q_long, margin);
}

/** @brief Replace outlier-driven observations by their BIP reconstruction.
 *
 * y*_t = y_t - a_t^b + sigma * eta(a_t^b / sigma) for t = p+1..n; the first
 * p observations pass through unchanged.  Observations whose BIP residual
 * lies in the identity region |a| <= 2 sigma are returned exactly as is.
 */
[[nodiscard]] inline Series bip_clean(const Series& y,
                                      const ArmaParams& params, double sigma,
                                      const RhoFamily& family,
                                      double margin = 0.01) {
    const Residuals res = bip_residuals(y, params, sigma, family, margin);
    const std::size_t p = params.p();
    Series out;
    out.values = y.values;
    for (std::size_t j = 0; j < res.values.size(); ++j) {
        const double a = res.values[j];
        const double u = a / sigma;
        const double e = family.eta(u);
        // Inside eta's identity region the sample is untouched; skip the
        // arithmetic so it stays bit-identical, not merely close.
        if (e == u) continue;
        out.values[p + j] = y[p + j] - a + sigma * e;
    }
    return out;
}

}  // namespace robustarma
