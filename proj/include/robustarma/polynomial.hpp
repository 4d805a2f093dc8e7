#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "robustarma/types.hpp"

/// Polynomial algebra for the AR/MA characteristic polynomials
/// phi(B) = 1 - sum_i phi_i B^i and theta(B) = 1 - sum_j theta_j B^j:
/// root location (stationarity / invertibility checks), series long
/// division for the MA(infinity) representation, and radial root shrinkage
/// used to project classical starting points back into the feasible set.
namespace robustarma {

/// Roots of 1 - c_1 z - ... - c_k z^k, via the companion matrix of the
/// reversed (monic) polynomial. Trailing zero coefficients are dropped
/// first; an all-zero coefficient vector has no roots.
inline std::vector<std::complex<double>> poly_roots(const std::vector<double>& coeffs) {
    std::size_t k = coeffs.size();
    while (k > 0 && coeffs[k - 1] == 0.0) --k;
    std::vector<std::complex<double>> roots;
    if (k == 0) return roots;

    // Dividing 1 - sum c_i z^i by -c_k gives the monic polynomial
    // z^k + a_{k-1} z^{k-1} + ... + a_0 with a_0 = -1/c_k and a_i = c_i/c_k.
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                                      static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i + 1 < k; ++i)
        companion(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = 1.0;
    companion(0, static_cast<Eigen::Index>(k - 1)) = 1.0 / coeffs[k - 1];  // -a_0
    for (std::size_t i = 1; i < k; ++i)
        companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k - 1)) =
            -coeffs[i - 1] / coeffs[k - 1];  // -a_i
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion);
    roots.reserve(k);
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
        roots.push_back(solver.eigenvalues()(i));
    return roots;
}

/// Smallest root modulus of 1 - sum c_i z^i; +infinity when the polynomial
/// is constant (no roots).
inline double min_root_modulus(const std::vector<double>& coeffs) {
    const auto roots = poly_roots(coeffs);
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : roots) m = std::min(m, std::abs(r));
    return m;
}

/// True iff every root of both characteristic polynomials has modulus
/// >= 1 + zeta_margin. Order-zero polynomials pass vacuously.
inline bool roots_within_margin(const ArmaParams& params, double zeta_margin = 0.01) {
    const double bound = 1.0 + zeta_margin;
    return min_root_modulus(params.phi) >= bound && min_root_modulus(params.theta) >= bound;
}

/// Coefficients lambda_1..lambda_{q_long} of the power series
/// phi^{-1}(B) theta(B) = 1 + sum_i lambda_i B^i, by long division.
/// Requires params inside B (the series diverges otherwise).
inline std::vector<double> ma_infinity_coeffs(const ArmaParams& params, std::size_t q_long,
                                              double zeta_margin = 0.01) {
    if (!roots_within_margin(params, zeta_margin))
        throw outside_parameter_region("ma_infinity_coeffs: parameters outside the feasible set");
    const std::size_t p = params.p(), q = params.q();
    std::vector<double> lambda(q_long, 0.0);
    for (std::size_t j = 1; j <= q_long; ++j) {
        double s = j <= q ? -params.theta[j - 1] : 0.0;
        const std::size_t imax = std::min(p, j);
        for (std::size_t i = 1; i <= imax; ++i) {
            const double prev = (j - i == 0) ? 1.0 : lambda[j - i - 1];
            s += params.phi[i - 1] * prev;
        }
        lambda[j - 1] = s;
    }
    return lambda;
}

namespace detail {

/// Rebuilds 1 - sum c_i z^i coefficients from its roots:
/// prod (1 - z/r_j) expanded, imaginary residue from conjugate pairing
/// discarded.
inline std::vector<double> coeffs_from_roots(const std::vector<std::complex<double>>& roots) {
    std::vector<std::complex<double>> poly{1.0};  // ascending powers of z
    for (const auto& r : roots) {
        std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
        const std::complex<double> inv = 1.0 / r;
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += poly[i];
            next[i + 1] -= poly[i] * inv;
        }
        poly.swap(next);
    }
    std::vector<double> coeffs(poly.size() - 1);
    for (std::size_t i = 1; i < poly.size(); ++i) coeffs[i - 1] = -poly[i].real();
    return coeffs;
}

}  // namespace detail

/// Projects params into the feasible set by radially moving every root of
/// phi(B) or theta(B) with modulus < 1 + zeta_margin out to modulus
/// 1 + 2 zeta_margin (equivalently, offending poles are pulled inside
/// 1/(1 + 2 zeta_margin)). Parameters already inside B are returned
/// unchanged.
inline ArmaParams shrink_into_margin(const ArmaParams& params, double zeta_margin = 0.01) {
    const double bound = 1.0 + zeta_margin;
    const double target = 1.0 + 2.0 * zeta_margin;
    ArmaParams out = params;
    for (auto* coeffs : {&out.phi, &out.theta}) {
        if (coeffs->empty()) continue;
        auto roots = poly_roots(*coeffs);
        bool moved = false;
        for (auto& r : roots) {
            const double mod = std::abs(r);
            if (mod < bound) {
                r *= target / std::max(mod, 1e-12);
                moved = true;
            }
        }
        if (moved) {
            auto rebuilt = detail::coeffs_from_roots(roots);
            rebuilt.resize(coeffs->size(), 0.0);
            *coeffs = rebuilt;
        }
    }
    return out;
}

}  // namespace robustarma
