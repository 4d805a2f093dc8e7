#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

/// Numerical quadrature for expectations under the standard normal law.
///
/// Two schemes are provided:
///  - Gauss-Hermite nodes/weights (Golub-Welsch), used for the smooth tensor
///    integrals of the influence function.
///  - Composite Gauss-Legendre over caller-supplied smoothness segments,
///    used for the score-family constants whose integrands have derivative
///    kinks at fixed knots. Plain Gauss-Hermite loses its spectral accuracy
///    on those integrands; splitting at the knots restores it.
namespace robustarma {

/// Nodes and weights such that integral f(x) exp(-x^2) dx ~= sum w_i f(x_i).
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

/// Golub-Welsch: nodes are eigenvalues of the symmetric Jacobi matrix with
/// the given off-diagonal recurrence coefficients; weights are mu0 times the
/// squared first eigenvector components.
inline std::pair<std::vector<double>, std::vector<double>>
golub_welsch(const std::vector<double>& offdiag, double mu0) {
    const std::size_t n = offdiag.size() + 1;
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                   static_cast<Eigen::Index>(n));
    for (std::size_t i = 1; i < n; ++i) {
        jacobi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = offdiag[i - 1];
        jacobi(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(i)) = offdiag[i - 1];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    std::vector<double> nodes(n), weights(n);
    for (std::size_t i = 0; i < n; ++i) {
        nodes[i] = solver.eigenvalues()(static_cast<Eigen::Index>(i));
        const double v0 = solver.eigenvectors()(0, static_cast<Eigen::Index>(i));
        weights[i] = mu0 * v0 * v0;
    }
    return {std::move(nodes), std::move(weights)};
}

/// Cached Gauss-Legendre rule of order n on [-1,1].
inline const std::pair<std::vector<double>, std::vector<double>>& legendre_rule(std::size_t n) {
    static std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        std::vector<double> off(n - 1);
        for (std::size_t i = 1; i < n; ++i) {
            const double k = static_cast<double>(i);
            off[i - 1] = k / std::sqrt(4.0 * k * k - 1.0);
        }
        it = cache.emplace(n, golub_welsch(off, 2.0)).first;
    }
    return it->second;
}

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

}  // namespace detail

/// Gauss-Hermite rule of order n. Exact for polynomials up to degree 2n-1
/// against the weight exp(-x^2).
inline GaussHermiteRule gauss_hermite(std::size_t n) {
    if (n == 0) throw std::invalid_argument("gauss_hermite: order must be positive");
    std::vector<double> off(n - 1);
    for (std::size_t i = 1; i < n; ++i) off[i - 1] = std::sqrt(static_cast<double>(i) / 2.0);
    auto [nodes, weights] = detail::golub_welsch(off, std::sqrt(M_PI));
    return GaussHermiteRule{std::move(nodes), std::move(weights)};
}

/// E[f(Z)], Z ~ N(0,1), via a Gauss-Hermite rule (change of variable
/// z = sqrt(2) x).
inline double normal_expectation_hermite(const std::function<double(double)>& f,
                                         const GaussHermiteRule& rule) {
    const double root2 = std::sqrt(2.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(root2 * rule.nodes[i]);
    return acc / std::sqrt(M_PI);
}

/// E[f(Z)], Z ~ N(0,1), by composite Gauss-Legendre over [0, upper] split at
/// the given knots, integrating the symmetrized integrand
/// (f(x) + f(-x)) * pdf(x). Near machine precision whenever f is smooth
/// between consecutive knots, which holds for the piecewise-polynomial score
/// family. `upper` reaches far enough into the normal tail that truncation
/// is below 1e-16 for bounded f.
inline double normal_expectation_segmented(const std::function<double(double)>& f,
                                           std::vector<double> knots,
                                           double upper = 14.0,
                                           std::size_t nodes_per_segment = 64) {
    knots.push_back(0.0);
    knots.push_back(upper);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    const auto& [nodes, weights] = detail::legendre_rule(nodes_per_segment);
    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
        const double a = knots[s], b = std::min(knots[s + 1], upper);
        if (!(a >= 0.0) || b <= a || a >= upper) continue;
        const double half = 0.5 * (b - a);
        const double mid = a + half;
        double seg = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double x = mid + half * nodes[i];
            seg += weights[i] * (f(x) + f(-x)) * detail::normal_pdf(x);
        }
        acc += half * seg;
    }
    return acc;
}

/// E[f(Z)], Z ~ N(0,1), by composite Gauss-Legendre over [lo, hi] split at
/// the interior knots, without assuming any symmetry of f. Used for
/// integrands whose kink locations are not symmetric about zero (e.g. the
/// shifted score arguments inside the influence-function integrals).
inline double normal_expectation_knots(const std::function<double(double)>& f,
                                       std::vector<double> interior_knots,
                                       double lo = -14.0, double hi = 14.0,
                                       std::size_t nodes_per_segment = 64) {
    std::vector<double> knots;
    knots.push_back(lo);
    knots.push_back(hi);
    for (double k : interior_knots) {
        if (k > lo && k < hi) knots.push_back(k);
    }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    const auto& [nodes, weights] = detail::legendre_rule(nodes_per_segment);
    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
        const double a = knots[s], b = knots[s + 1];
        const double half = 0.5 * (b - a);
        const double mid = a + half;
        double seg = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double x = mid + half * nodes[i];
            seg += weights[i] * f(x) * detail::normal_pdf(x);
        }
        acc += half * seg;
    }
    return acc;
}

}  // namespace robustarma
