#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "robustarma/quadrature.hpp"
#include "robustarma/score.hpp"

/// Robust M-scale and tau-scale of a residual vector, their distributional
/// constants, and the matching M-estimate of location.
namespace robustarma {

/// A scale estimate. `degenerate` marks the all-zero-residual case, where
/// the defining equation has no positive solution and 0 is returned.
struct ScaleValue {
    double sigma = 0.0;
    bool degenerate = false;
};

/// Which score the constant refers to.
enum class WhichRho { rho1, rho2 };

/// b = E[rho(Z)] under the standard normal, by knot-aware quadrature.
inline double b_constant(const RhoFamily& family, WhichRho which) {
    if (which == WhichRho::rho1)
        return normal_expectation_segmented([&](double x) { return family.rho1(x); },
                                            family.knots_rho1());
    return normal_expectation_segmented([&](double x) { return family.rho2(x); },
                                        family.knots_rho2());
}

/// kappa^2 = Var[eta(Z)] = E[eta(Z)^2] (eta is odd and the nominal law
/// symmetric, so the mean term vanishes).
inline double kappa_squared(const RhoFamily& family) {
    return normal_expectation_segmented(
        [&](double x) { const double e = family.eta(x); return e * e; }, family.knots_rho2());
}

namespace detail {

inline double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    double hi = *mid;
    if (n % 2 == 1) return hi;
    std::nth_element(v.begin(), mid - 1, v.end());
    return 0.5 * (*(mid - 1) + hi);
}

/// Median of |r| divided by the standard-normal consistency factor; used to
/// initialize the scale iteration. Falls back to the mean absolute value
/// when the median vanishes but the data are not identically zero.
inline double normalized_mad_about_zero(const std::vector<double>& r) {
    std::vector<double> a(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) a[i] = std::abs(r[i]);
    double med = median_inplace(a);
    if (med > 0.0) return med / 0.6745;
    double mean = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) mean += std::abs(r[i]);
    return mean / static_cast<double>(r.size());
}

}  // namespace detail

/// Median absolute deviation about the median, scaled by 1/0.6745.
inline double normalized_mad(const std::vector<double>& v) {
    std::vector<double> tmp = v;
    const double med = detail::median_inplace(tmp);
    for (std::size_t i = 0; i < v.size(); ++i) tmp[i] = std::abs(v[i] - med);
    return detail::median_inplace(tmp) / 0.6745;
}

/// M-scale: the solution sigma of (1/m) sum rho1(r_t / sigma) = b1, found by
/// the fixed-point iteration
///   sigma^2_{k+1} = sigma^2_k * (1/(m b1)) sum rho1(r_t / sigma_k),
/// which converges globally for this bounded, monotone rho class. Initial
/// value is the normalized MAD about zero.
inline ScaleValue m_scale(const std::vector<double>& residuals, const RhoFamily& family,
                          double rel_tol = 1e-8, std::size_t max_iter = 100) {
    if (residuals.empty()) throw std::invalid_argument("m_scale: empty residual vector");
    const std::size_t m = residuals.size();
    bool all_zero = true;
    for (double r : residuals) {
        if (!std::isfinite(r)) throw std::invalid_argument("m_scale: non-finite residual");
        if (r != 0.0) all_zero = false;
    }
    if (all_zero) return ScaleValue{0.0, true};

    const double b1 = family.b1;
    double sigma2 = detail::normalized_mad_about_zero(residuals);
    sigma2 *= sigma2;
    if (sigma2 <= 0.0) sigma2 = 1.0;

    for (std::size_t it = 0; it < max_iter; ++it) {
        const double sigma = std::sqrt(sigma2);
        double acc = 0.0;
        for (double r : residuals) acc += family.rho1(r / sigma);
        const double next = sigma2 * acc / (static_cast<double>(m) * b1);
        const bool done = std::abs(next - sigma2) <= rel_tol * sigma2;
        sigma2 = next;
        if (done) break;
    }
    return ScaleValue{std::sqrt(sigma2), false};
}

/// tau-scale given an already-computed M-scale of the same residual vector:
/// sigma_tau = sigma_M * sqrt((1/m) sum rho2(r_t / sigma_M)). Returns 0 for
/// a non-positive (degenerate) M-scale.
inline double tau_scale(const std::vector<double>& residuals, double m_sigma,
                        const RhoFamily& family) {
    if (!(m_sigma > 0.0)) return 0.0;
    double acc = 0.0;
    for (double r : residuals) acc += family.rho2(r / m_sigma);
    return m_sigma * std::sqrt(acc / static_cast<double>(residuals.size()));
}

/// tau-scale: sigma_tau = sigma_M * sqrt((1/m) sum rho2(r_t / sigma_M)).
/// The averaging count is the residual vector length; callers that need the
/// conventional n-p normalization pass n-p residuals.
inline ScaleValue tau_scale(const std::vector<double>& residuals, const RhoFamily& family) {
    const ScaleValue m = m_scale(residuals, family);
    if (m.degenerate) return m;
    return ScaleValue{tau_scale(residuals, m.sigma, family), false};
}

/// M-estimate of location with psi2 weights and fixed normalized-MAD scale:
/// iteratively reweighted mean with w(u) = psi2(u)/u (w(0) = 1). Used to
/// center observation series before AR grid searches.
inline double m_location(const std::vector<double>& y, const RhoFamily& family,
                         double rel_tol = 1e-9, std::size_t max_iter = 100) {
    if (y.empty()) throw std::invalid_argument("m_location: empty sample");
    std::vector<double> tmp = y;
    double mu = detail::median_inplace(tmp);
    const double s = normalized_mad(y);
    if (s <= 0.0) return mu;  // more than half the sample at the median

    for (std::size_t it = 0; it < max_iter; ++it) {
        double wsum = 0.0, wy = 0.0;
        for (double v : y) {
            const double u = (v - mu) / s;
            const double w = std::abs(u) < 1e-12 ? 1.0 : family.psi2(u) / u;
            wsum += w;
            wy += w * v;
        }
        if (wsum <= 0.0) break;
        const double next = wy / wsum;
        const bool done = std::abs(next - mu) <= rel_tol * s;
        mu = next;
        if (done) break;
    }
    return mu;
}

}  // namespace robustarma
