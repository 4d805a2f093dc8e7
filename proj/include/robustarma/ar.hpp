#pragma once

/// Robust AR(p) estimation.
///
/// Each reflection coefficient is found by evaluating the tau-scale of the
/// reconstructed innovations on a coarse grid over (-1, 1), fitting a
/// quartic polynomial to the resulting curve per branch (plain AR and
/// BIP-AR), minimizing the fit on a fine grid, and refining the fitted
/// minimizer against the actual objective with a bracketed line search.
/// Lower-order coefficients are propagated with the Levinson recursion,
/// which keeps every visited candidate stationary.  The forward-backward
/// variant minimizes the arithmetic mean of the forward and backward
/// innovation scales instead of the forward scale alone.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "robustarma/innovations.hpp"
#include "robustarma/scale.hpp"
#include "robustarma/score.hpp"
#include "robustarma/types.hpp"

namespace robustarma {

/// Whether AR fitting minimizes the forward scale or the mean of the
/// forward and backward scales.
enum class ArMode { forward, forward_backward };

/// Tau-scales of the candidate innovations along the reflection grid.
struct ScaleCurve {
    std::vector<double> grid;        ///< zeta values, strictly increasing
    std::vector<double> sigma_arma;  ///< forward AR-branch tau-scales
    std::vector<double> sigma_bip;   ///< forward BIP-branch tau-scales
    /// Backward scales, present in forward_backward mode only.
    std::optional<std::vector<double>> sigma_arma_bw;
    std::optional<std::vector<double>> sigma_bip_bw;

    [[nodiscard]] bool has_backward() const {
        return sigma_arma_bw.has_value();
    }
    /// Per-branch objective at grid index i (mean of forward and backward
    /// scales when the backward curves are present).
    [[nodiscard]] double objective_arma(std::size_t i) const {
        return sigma_arma_bw ? 0.5 * (sigma_arma[i] + (*sigma_arma_bw)[i])
                             : sigma_arma[i];
    }
    [[nodiscard]] double objective_bip(std::size_t i) const {
        return sigma_bip_bw ? 0.5 * (sigma_bip[i] + (*sigma_bip_bw)[i])
                            : sigma_bip[i];
    }
};

/// Result of minimizing the fitted scale polynomials for one order.
struct PolyFitMinimum {
    double zeta_arma = 0.0;     ///< fine-grid argmin, AR branch
    double zeta_bip = 0.0;      ///< fine-grid argmin, BIP branch
    double fit_min_arma = 0.0;  ///< fitted polynomial value at the argmin
    double fit_min_bip = 0.0;
    bool flat_arma = false;  ///< curve was (numerically) constant
    bool flat_bip = false;
};

/// Full record of a recursive AR fit.
struct ArFitTrace {
    std::vector<double> partial_coeffs;  ///< phi_{m,m} for m = 1..p
    std::vector<Branch> branch_per_order;
    std::vector<double> sigma_per_order;  ///< winning objective per order
    std::vector<double> phi;              ///< final AR(p) coefficients
    double mu = 0.0;
    double sigma_tau_star = 0.0;  ///< min of the two branch scales at phi
    Branch branch_star = Branch::ARMA;
    double sigma_hat = 0.0;  ///< innovations-scale estimate at the final phi
    double sigma_arma_final = 0.0;  ///< forward AR-branch scale at phi
    double sigma_bip_final = 0.0;   ///< forward BIP-branch scale at phi
};

namespace detail {

/// Coarse reflection grid: lo, lo+step, ... not exceeding hi (half-open at
/// the top like a MATLAB colon range, so -0.99:0.05:0.99 ends at 0.96).
[[nodiscard]] inline std::vector<double> reflection_grid(double step,
                                                         double lo = -0.99,
                                                         double hi = 0.99) {
    std::vector<double> g;
    const auto count =
        static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-12)) + 1;
    g.reserve(count);
    for (std::size_t k = 0; k < count; ++k) g.push_back(lo + step * static_cast<double>(k));
    return g;
}

/// Levinson update: coefficients of order m from order m-1 plus the new
/// reflection coefficient zeta.
[[nodiscard]] inline std::vector<double> levinson_update(
    const std::vector<double>& prev, double zeta) {
    const std::size_t m = prev.size() + 1;
    std::vector<double> out(m);
    for (std::size_t i = 1; i < m; ++i) {
        out[i - 1] = prev[i - 1] - zeta * prev[m - i - 1];
    }
    out[m - 1] = zeta;
    return out;
}

[[nodiscard]] inline double tau_of(const std::vector<double>& residuals,
                                   const RhoFamily& family) {
    const ScaleValue m = m_scale(residuals, family);
    if (m.degenerate) return 0.0;
    return tau_scale(residuals, m.sigma, family);
}

/// Least-squares polynomial fit of the given degree; returns coefficients
/// in increasing power order.
[[nodiscard]] inline std::vector<double> polyfit(const std::vector<double>& x,
                                                 const std::vector<double>& y,
                                                 int degree) {
    const auto rows = static_cast<Eigen::Index>(x.size());
    const Eigen::Index cols = degree + 1;
    Eigen::MatrixXd vand(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        double pw = 1.0;
        for (Eigen::Index j = 0; j < cols; ++j) {
            vand(i, j) = pw;
            pw *= x[static_cast<std::size_t>(i)];
        }
    }
    Eigen::VectorXd rhs(rows);
    for (Eigen::Index i = 0; i < rows; ++i) rhs(i) = y[static_cast<std::size_t>(i)];
    const Eigen::VectorXd c = vand.householderQr().solve(rhs);
    return std::vector<double>(c.data(), c.data() + c.size());
}

[[nodiscard]] inline double polyval(const std::vector<double>& coeffs,
                                    double x) {
    double v = 0.0;
    for (std::size_t j = coeffs.size(); j-- > 0;) v = v * x + coeffs[j];
    return v;
}

/// Minimize one fitted curve on the fine grid; ties (within a relative
/// tolerance) prefer the zeta of smaller magnitude.
inline void minimize_fitted_curve(const std::vector<double>& grid,
                                  const std::vector<double>& values,
                                  int fit_order, double fine_step,
                                  double& zeta_out, double& min_out,
                                  bool& flat_out) {
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double spread = *hi_it - *lo_it;
    if (!(spread > 1e-12 * std::max(1.0, std::abs(*hi_it)))) {
        zeta_out = 0.0;
        min_out = values.front();
        flat_out = true;
        return;
    }
    flat_out = false;
    const std::vector<double> coeffs = polyfit(grid, values, fit_order);
    const double lo = -0.99, hi = 0.99;
    const auto steps =
        static_cast<std::size_t>(std::llround((hi - lo) / fine_step));
    double best_z = lo;
    double best_v = polyval(coeffs, lo);
    for (std::size_t k = 1; k <= steps; ++k) {
        const double z = lo + fine_step * static_cast<double>(k);
        const double v = polyval(coeffs, z);
        const double tol = 1e-9 * (1.0 + std::abs(best_v));
        if (v < best_v - tol ||
            (std::abs(v - best_v) <= tol && std::abs(z) < std::abs(best_z))) {
            best_z = z;
            best_v = v;
        }
    }
    zeta_out = best_z;
    min_out = best_v;
}

/// Golden-section minimization of a unimodal scalar function on [lo, hi].
/// Deterministic; returns the bracketed minimizer to within tol.
template <typename F>
[[nodiscard]] inline std::pair<double, double> golden_section_minimize(
    const F& g, double lo, double hi, double tol = 5e-4) {
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = g(x1), f2 = g(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = g(x2);
        }
    }
    return (f1 <= f2) ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

/// Evaluate both branch objectives at a single candidate (used on grid
/// points and again at the fitted minimizers).
struct BranchObjectives {
    double arma = 0.0;
    double bip = 0.0;
    double fwd_arma = 0.0;
    double fwd_bip = 0.0;
    double bwd_arma = 0.0;
    double bwd_bip = 0.0;
};

[[nodiscard]] inline BranchObjectives evaluate_ar_candidate(
    const Series& y, const std::vector<double>& phi, double mu,
    double sigma_tau_y, const RhoFamily& family, ArMode mode,
    std::size_t q_long) {
    ArmaParams cand;
    cand.phi = phi;
    cand.mu = mu;

    BranchObjectives obj;
    const Residuals fwd_e = arma_residuals(y, cand, /*margin=*/0.0);
    obj.fwd_arma = tau_of(fwd_e.values, family);
    const double sigma_hat =
        sigma_from_ma_infinity(sigma_tau_y, cand, family, q_long,
                               /*margin=*/0.0);
    const Residuals fwd_b =
        bip_residuals(y, cand, std::max(sigma_hat, 1e-12), family,
                      /*margin=*/0.0);
    obj.fwd_bip = tau_of(fwd_b.values, family);

    if (mode == ArMode::forward_backward) {
        const Residuals bwd_e = ar_backward_residuals(
            y, cand, Branch::ARMA, std::nullopt, family, /*margin=*/0.0);
        obj.bwd_arma = tau_of(bwd_e.values, family);
        const Residuals bwd_b = ar_backward_residuals(
            y, cand, Branch::BIP, std::max(sigma_hat, 1e-12), family,
            /*margin=*/0.0);
        obj.bwd_bip = tau_of(bwd_b.values, family);
        obj.arma = 0.5 * (obj.fwd_arma + obj.bwd_arma);
        obj.bip = 0.5 * (obj.fwd_bip + obj.bwd_bip);
    } else {
        obj.arma = obj.fwd_arma;
        obj.bip = obj.fwd_bip;
    }
    return obj;
}

}  // namespace detail

/** @brief Tau-scale curves of the order-m candidates along the coarse grid.
 *
 * For each zeta on the grid the order-m coefficient vector is built from
 * `prev` (the order m-1 coefficients) via the Levinson update, and the
 * tau-scales of the plain-AR and BIP-AR innovations are recorded; the BIP
 * recursion is clipped at the scale estimate from the MA-infinity
 * representation at that zeta.  forward_backward mode also records the
 * backward scales.
 */
[[nodiscard]] inline ScaleCurve scale_curve_on_grid(
    const Series& y, std::size_t m, const std::vector<double>& prev,
    const RhoFamily& family, double grid_step, ArMode mode, double mu,
    double sigma_tau_y, std::size_t q_long = 100) {
    if (prev.size() + 1 != m) {
        throw std::invalid_argument(
            "scale_curve_on_grid: prev must hold the order m-1 coefficients");
    }
    ScaleCurve curve;
    curve.grid = detail::reflection_grid(grid_step);
    curve.sigma_arma.reserve(curve.grid.size());
    curve.sigma_bip.reserve(curve.grid.size());
    if (mode == ArMode::forward_backward) {
        curve.sigma_arma_bw.emplace();
        curve.sigma_bip_bw.emplace();
        curve.sigma_arma_bw->reserve(curve.grid.size());
        curve.sigma_bip_bw->reserve(curve.grid.size());
    }
    for (double zeta : curve.grid) {
        const std::vector<double> phi = detail::levinson_update(prev, zeta);
        const detail::BranchObjectives obj = detail::evaluate_ar_candidate(
            y, phi, mu, sigma_tau_y, family, mode, q_long);
        curve.sigma_arma.push_back(obj.fwd_arma);
        curve.sigma_bip.push_back(obj.fwd_bip);
        if (mode == ArMode::forward_backward) {
            curve.sigma_arma_bw->push_back(obj.bwd_arma);
            curve.sigma_bip_bw->push_back(obj.bwd_bip);
        }
    }
    return curve;
}

/** @brief Fit quartic polynomials to the per-branch scale curves and
 * minimize them on a fine grid over [-0.99, 0.99].
 *
 * Ties prefer the smaller |zeta|; a numerically constant curve yields
 * zeta = 0 with the flat flag set.  In forward_backward curves the fitted
 * quantity is the per-branch mean of forward and backward scales.
 */
[[nodiscard]] inline PolyFitMinimum poly_fit_minimize(const ScaleCurve& curve,
                                                      int fit_order = 4,
                                                      double fine_step = 0.001) {
    if (curve.grid.size() < static_cast<std::size_t>(fit_order) + 1) {
        throw std::invalid_argument(
            "poly_fit_minimize: need at least fit_order+1 grid points");
    }
    std::vector<double> obj_arma(curve.grid.size());
    std::vector<double> obj_bip(curve.grid.size());
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        obj_arma[i] = curve.objective_arma(i);
        obj_bip[i] = curve.objective_bip(i);
    }
    PolyFitMinimum out;
    detail::minimize_fitted_curve(curve.grid, obj_arma, fit_order, fine_step,
                                  out.zeta_arma, out.fit_min_arma,
                                  out.flat_arma);
    detail::minimize_fitted_curve(curve.grid, obj_bip, fit_order, fine_step,
                                  out.zeta_bip, out.fit_min_bip, out.flat_bip);
    return out;
}

namespace detail {

[[nodiscard]] inline ArFitTrace estimate_ar_impl(const Series& y,
                                                 std::size_t p,
                                                 const RhoFamily& family,
                                                 double grid_step, ArMode mode,
                                                 std::size_t q_long) {
    if (mode == ArMode::forward ? (y.n() <= p) : (y.n() <= 2 * p)) {
        throw std::invalid_argument("estimate_ar: series too short");
    }
    ArFitTrace trace;
    trace.mu = m_location(y.values, family);

    std::vector<double> centered(y.values);
    for (double& v : centered) v -= trace.mu;
    const ScaleValue my = m_scale(centered, family);
    const double sigma_tau_y =
        my.degenerate ? 0.0 : tau_scale(centered, my.sigma, family);

    if (my.degenerate || sigma_tau_y <= 0.0) {
        // Constant series: nothing to fit.
        trace.phi.assign(p, 0.0);
        trace.partial_coeffs.assign(p, 0.0);
        trace.branch_per_order.assign(p, Branch::ARMA);
        trace.sigma_per_order.assign(p, 0.0);
        trace.sigma_tau_star = 0.0;
        trace.sigma_hat = 0.0;
        return trace;
    }

    std::vector<double> prev;
    for (std::size_t m = 1; m <= p; ++m) {
        const ScaleCurve curve = scale_curve_on_grid(
            y, m, prev, family, grid_step, mode, trace.mu, sigma_tau_y,
            q_long);
        const PolyFitMinimum fit = poly_fit_minimize(curve);

        // Per branch: take the fitted-polynomial minimizer, then refine it
        // against the actual objective with a bracketed line search.  The
        // bracket spans the coarse-grid argmin and the fitted argmin plus
        // one grid step on either side, so a poor polynomial fit cannot
        // drag the final zeta away from the true minimum.
        const auto refine = [&](bool bip_branch, double zeta_fit,
                                bool flat) -> std::pair<double, double> {
            const auto objective = [&](double z) {
                const BranchObjectives o = evaluate_ar_candidate(
                    y, levinson_update(prev, z), trace.mu, sigma_tau_y,
                    family, mode, q_long);
                return bip_branch ? o.bip : o.arma;
            };
            if (flat) return {0.0, objective(0.0)};
            std::size_t coarse = 0;
            for (std::size_t i = 1; i < curve.grid.size(); ++i) {
                const double vi = bip_branch ? curve.objective_bip(i)
                                             : curve.objective_arma(i);
                const double vb = bip_branch ? curve.objective_bip(coarse)
                                             : curve.objective_arma(coarse);
                if (vi < vb) coarse = i;
            }
            const double zc = curve.grid[coarse];
            const double lo =
                std::max(-0.99, std::min(zc, zeta_fit) - grid_step);
            const double hi =
                std::min(0.99, std::max(zc, zeta_fit) + grid_step);
            return golden_section_minimize(objective, lo, hi);
        };

        const auto [zeta_arma, obj_arma] =
            refine(false, fit.zeta_arma, fit.flat_arma);
        const auto [zeta_bip, obj_bip] =
            refine(true, fit.zeta_bip, fit.flat_bip);

        double zeta = zeta_arma;
        Branch winner = Branch::ARMA;
        double obj = obj_arma;
        if (obj_bip < obj) {
            zeta = zeta_bip;
            winner = Branch::BIP;
            obj = obj_bip;
        }
        prev = levinson_update(prev, zeta);
        trace.partial_coeffs.push_back(zeta);
        trace.branch_per_order.push_back(winner);
        trace.sigma_per_order.push_back(obj);
    }
    trace.phi = prev;

    // Final innovations scale: the smaller of the two forward branch
    // scales at the final coefficients (ties go to the plain-AR branch).
    const BranchObjectives fin = evaluate_ar_candidate(
        y, trace.phi, trace.mu, sigma_tau_y, family, ArMode::forward, q_long);
    ArmaParams final_params;
    final_params.phi = trace.phi;
    final_params.mu = trace.mu;
    trace.sigma_hat = sigma_from_ma_infinity(sigma_tau_y, final_params,
                                             family, q_long, /*margin=*/0.0);
    trace.sigma_arma_final = fin.arma;
    trace.sigma_bip_final = fin.bip;
    if (fin.bip < fin.arma) {
        trace.branch_star = Branch::BIP;
        trace.sigma_tau_star = fin.bip;
    } else {
        trace.branch_star = Branch::ARMA;
        trace.sigma_tau_star = fin.arma;
    }
    return trace;
}

}  // namespace detail

/** @brief Robust AR(p) fit: per order, grid search + quartic-fit
 * minimization of the forward innovation tau-scale over both branches.
 */
[[nodiscard]] inline ArFitTrace estimate_ar_durbin_levinson(
    const Series& y, std::size_t p, const RhoFamily& family,
    double grid_step = 0.05, std::size_t q_long = 100) {
    return detail::estimate_ar_impl(y, p, family, grid_step, ArMode::forward,
                                    q_long);
}

/** @brief Robust AR(p) fit minimizing the mean of the forward and backward
 * innovation tau-scales per branch.  Requires n > 2p.
 */
[[nodiscard]] inline ArFitTrace estimate_ar_forward_backward(
    const Series& y, std::size_t p, const RhoFamily& family,
    double grid_step = 0.05, std::size_t q_long = 100) {
    return detail::estimate_ar_impl(y, p, family, grid_step,
                                    ArMode::forward_backward, q_long);
}

}  // namespace robustarma
