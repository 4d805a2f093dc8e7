#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "robustarma/quadrature.hpp"

/// The bounded score-function family driving the tau estimator.
///
/// rho2 is the smooth piecewise polynomial
///
///   rho2(x) = 0.5 x^2                                          |x| <= 2
///           = 0.002|x|^8 - 0.052|x|^6 + 0.432|x|^4
///             - 0.972 x^2 + 1.792                          2 < |x| <= 3
///           = 3.25                                             |x| >  3
///
/// rho1(x) = rho2(x / c1) for a tuning constant c1 > 0, psi_j = d rho_j/dx,
/// and the propagation-clipping function is eta = psi2. A quadratic variant
/// (rho(x) = x^2/2, eta identity) is included so least-squares behaviour can
/// be expressed in the same interface.
namespace robustarma {

namespace detail {

inline double rho2_base(double x) {
    const double ax = std::abs(x);
    if (ax <= 2.0) return 0.5 * x * x;
    if (ax <= 3.0) {
        const double x2 = ax * ax;
        const double x4 = x2 * x2;
        return 0.002 * x4 * x4 - 0.052 * x4 * x2 + 0.432 * x4 - 0.972 * x2 + 1.792;
    }
    return 3.25;
}

inline double psi2_base(double x) {
    const double ax = std::abs(x);
    if (ax <= 2.0) return x;
    if (ax <= 3.0) {
        const double x2 = ax * ax;
        const double x4 = x2 * x2;
        const double mag = 0.016 * x4 * x2 * ax - 0.312 * x4 * ax + 1.728 * x2 * ax - 1.944 * ax;
        return x >= 0.0 ? mag : -mag;
    }
    return 0.0;
}

}  // namespace detail

/// Score-function bundle with its distributional constants. Immutable after
/// construction; cheap to copy.
struct RhoFamily {
    enum class Kind { bounded, quadratic };

    Kind kind = Kind::bounded;
    double c1 = 1.0;      ///< scaling of rho1 relative to rho2
    double b1 = 0.0;      ///< E[rho1(Z)], the M-scale consistency constant
    double b2 = 0.0;      ///< E[rho2(Z)]
    double kappa2 = 0.0;  ///< E[eta(Z)^2]

    double rho1(double x) const {
        return kind == Kind::quadratic ? 0.5 * x * x : detail::rho2_base(x / c1);
    }
    double rho2(double x) const {
        return kind == Kind::quadratic ? 0.5 * x * x : detail::rho2_base(x);
    }
    double psi1(double x) const {
        return kind == Kind::quadratic ? x : detail::psi2_base(x / c1) / c1;
    }
    double psi2(double x) const {
        return kind == Kind::quadratic ? x : detail::psi2_base(x);
    }
    /// Propagation-clipping function; identity for the quadratic family, so
    /// every BIP recursion collapses to its ARMA counterpart.
    double eta(double x) const {
        return kind == Kind::quadratic ? x : detail::psi2_base(x);
    }

    /// Knots (positive axis) at which rho1/psi1 switch polynomial branches.
    std::vector<double> knots_rho1() const {
        if (kind == Kind::quadratic) return {};
        return {2.0 * c1, 3.0 * c1};
    }
    /// Knots for rho2/psi2/eta.
    std::vector<double> knots_rho2() const {
        if (kind == Kind::quadratic) return {};
        return {2.0, 3.0};
    }
    /// Union of all branch knots, for integrands mixing both scores.
    std::vector<double> knots_all() const {
        if (kind == Kind::quadratic) return {};
        return {2.0 * c1, 3.0 * c1, 2.0, 3.0};
    }
};

/// Builds the family for a tuning constant c1 and populates its
/// distributional constants by knot-aware quadrature.
inline RhoFamily make_rho_family(double c1) {
    if (!(c1 > 0.0)) throw std::invalid_argument("make_rho_family: c1 must be positive");
    RhoFamily f;
    f.kind = RhoFamily::Kind::bounded;
    f.c1 = c1;
    f.b1 = normal_expectation_segmented([&](double x) { return f.rho1(x); }, f.knots_rho1());
    f.b2 = normal_expectation_segmented([&](double x) { return f.rho2(x); }, f.knots_rho2());
    f.kappa2 = normal_expectation_segmented([&](double x) { const double e = f.eta(x); return e * e; },
                                            f.knots_rho2());
    return f;
}

/// The quadratic test family rho1 = rho2 = x^2/2: the tau objective reduces
/// to the sum of squared residuals and eta is the identity.
inline RhoFamily make_quadratic_family() {
    RhoFamily f;
    f.kind = RhoFamily::Kind::quadratic;
    f.c1 = 1.0;
    f.b1 = 0.5;
    f.b2 = 0.5;
    f.kappa2 = 1.0;
    return f;
}

}  // namespace robustarma
