#pragma once

/// Process simulation, outlier contamination, classical baselines, Monte
/// Carlo experiment drivers, and bias-curve computation.
///
/// All randomness flows through the deterministic sampler in rng.hpp with
/// per-run seeds derived from the master seed, so reports are reproducible
/// bit for bit and independent of replicate execution order.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "robustarma/arma.hpp"
#include "robustarma/rng.hpp"
#include "robustarma/scale.hpp"
#include "robustarma/types.hpp"

namespace robustarma {

/// Outlier insertion model.
enum class ContaminationKind { none, AO, RO, innovation };

/// Temporal placement of the contaminated indices.
enum class TemporalPattern { isolated, patchy, equally_spaced };

/// Distribution of the contaminating values w_t.
struct ContaminantDist {
    enum class Type { normal, half_normal, point_mass, constant };
    Type type = Type::normal;
    double value = 1.0;  ///< sigma_w for the normal types, c_w otherwise

    [[nodiscard]] static ContaminantDist normal(double sigma_w) {
        return {Type::normal, sigma_w};
    }
    [[nodiscard]] static ContaminantDist half_normal(double sigma_w) {
        return {Type::half_normal, sigma_w};
    }
    [[nodiscard]] static ContaminantDist point_mass(double c_w) {
        return {Type::point_mass, c_w};
    }
    [[nodiscard]] static ContaminantDist constant(double c_w) {
        return {Type::constant, c_w};
    }
};

struct ContaminationSpec {
    ContaminationKind kind = ContaminationKind::none;
    double epsilon = 0.0;  ///< contamination fraction in [0, 1]
    TemporalPattern temporal = TemporalPattern::isolated;
    std::size_t n_patch = 1;  ///< patch length for the patchy pattern
    ContaminantDist contaminant;
};

/** @brief Simulate an ARMA(p,q) process with iid Gaussian innovations.
 *
 * The recursion warms up over `burn_in` discarded samples (default
 * 50*(p+q)+100, long enough for near-unit-root models to forget the
 * initialization) and is deterministic under the seed.
 */
[[nodiscard]] inline Series generate_arma(const ArmaParams& params,
                                          std::size_t n,
                                          double innovation_sigma,
                                          std::uint64_t seed,
                                          std::optional<std::size_t> burn_in =
                                              std::nullopt) {
    if (!roots_within_margin(params, 0.01)) {
        throw outside_parameter_region(
            "generate_arma: parameters outside the admissible region");
    }
    if (!(innovation_sigma > 0.0)) {
        throw std::invalid_argument(
            "generate_arma: innovation sigma must be positive");
    }
    const std::size_t p = params.p();
    const std::size_t q = params.q();
    const std::size_t warm = burn_in.value_or(50 * (p + q) + 100);
    const std::size_t total = warm + n;

    Rng rng(seed);
    std::vector<double> a(total), x(total);
    for (std::size_t t = 0; t < total; ++t) {
        a[t] = innovation_sigma * rng.normal();
        double v = a[t];
        for (std::size_t i = 1; i <= p; ++i) {
            v += (t >= i) ? params.phi[i - 1] * x[t - i] : 0.0;
        }
        for (std::size_t j = 1; j <= q; ++j) {
            v -= (t >= j) ? params.theta[j - 1] * a[t - j] : 0.0;
        }
        x[t] = v;
    }
    Series out;
    out.values.resize(n);
    for (std::size_t t = 0; t < n; ++t) out.values[t] = params.mu + x[warm + t];
    return out;
}

namespace detail {

/// True when the sorted index set contains two adjacent values.
[[nodiscard]] inline bool has_adjacent(const std::vector<std::size_t>& idx) {
    for (std::size_t i = 1; i < idx.size(); ++i) {
        if (idx[i] == idx[i - 1] + 1) return true;
    }
    return false;
}

/// Indices of the contaminated samples under the given placement rule.
[[nodiscard]] inline std::vector<std::size_t> contamination_indices(
    std::size_t n, const ContaminationSpec& spec, Rng& rng) {
    const auto n_out = static_cast<std::size_t>(
        std::llround(spec.epsilon * static_cast<double>(n)));
    if (n_out == 0) return {};

    if (spec.temporal == TemporalPattern::equally_spaced) {
        std::vector<std::size_t> idx(n_out);
        for (std::size_t j = 0; j < n_out; ++j) {
            idx[j] = (j * n) / n_out;
        }
        return idx;
    }

    if (spec.temporal == TemporalPattern::patchy) {
        if (spec.n_patch == 0 || spec.n_patch > n / 2) {
            throw std::invalid_argument(
                "contaminate: patch length must be in [1, n/2]");
        }
        const auto patches = static_cast<std::size_t>(std::ceil(
            static_cast<double>(n_out) / static_cast<double>(spec.n_patch) -
            1e-9));
        if (patches * spec.n_patch > n) {
            throw std::invalid_argument(
                "contaminate: infeasible patch layout");
        }
        for (int attempt = 0; attempt < 1000; ++attempt) {
            std::vector<std::size_t> starts(patches);
            for (std::size_t j = 0; j < patches; ++j) {
                starts[j] = rng.uniform_index(n - spec.n_patch + 1);
            }
            std::sort(starts.begin(), starts.end());
            bool overlap = false;
            for (std::size_t j = 1; j < patches; ++j) {
                if (starts[j] < starts[j - 1] + spec.n_patch) {
                    overlap = true;
                    break;
                }
            }
            if (overlap) continue;
            std::vector<std::size_t> idx;
            idx.reserve(patches * spec.n_patch);
            for (std::size_t s : starts) {
                for (std::size_t k = 0; k < spec.n_patch; ++k) {
                    idx.push_back(s + k);
                }
            }
            return idx;
        }
        throw std::invalid_argument(
            "contaminate: could not place non-overlapping patches");
    }

    // Isolated: fixed count, uniform placement without replacement; the
    // no-two-adjacent constraint is enforced by re-draw with a bounded
    // number of attempts (at high epsilon the constraint becomes
    // unsatisfiable in practice and plain random placement is accepted).
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> idx(n_out);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        for (std::size_t i = 0; i < n_out; ++i) {
            const std::size_t j = i + rng.uniform_index(n - i);
            std::swap(pool[i], pool[j]);
        }
        idx.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_out));
        std::sort(idx.begin(), idx.end());
        if (!has_adjacent(idx)) return idx;
    }
    return idx;  // constraint abandoned after the attempt budget
}

[[nodiscard]] inline double draw_contaminant(const ContaminantDist& dist,
                                             Rng& rng) {
    switch (dist.type) {
        case ContaminantDist::Type::normal:
            return rng.normal(0.0, dist.value);
        case ContaminantDist::Type::half_normal:
            return rng.half_normal(dist.value);
        case ContaminantDist::Type::point_mass:
            return dist.value * rng.random_sign();
        case ContaminantDist::Type::constant:
            return dist.value;
    }
    return 0.0;
}

}  // namespace detail

/// Contaminated series together with the mask of affected indices.
struct ContaminatedSeries {
    Series y;
    std::vector<std::size_t> indices;  ///< sorted contaminated positions
};

/** @brief Insert additive or replacement outliers into a series.
 *
 * AO adds the contaminant to the clean value, RO replaces it.  The number
 * of contaminated samples is round(epsilon * n); isolated placement draws
 * uniformly subject to the no-adjacent-outliers constraint, patchy
 * placement inserts ceil(count / n_patch) full-length patches, and
 * equally_spaced places them deterministically at floor(j*n/count).
 */
[[nodiscard]] inline ContaminatedSeries contaminate_with_mask(
    const Series& x, const ContaminationSpec& spec, std::uint64_t seed) {
    if (spec.kind == ContaminationKind::innovation) {
        throw std::invalid_argument(
            "contaminate: innovation outliers act on the driving noise, "
            "not on observations; use generate_arma with a modified "
            "innovation stream instead");
    }
    if (spec.epsilon < 0.0 || spec.epsilon > 1.0) {
        throw std::invalid_argument("contaminate: epsilon must be in [0,1]");
    }
    ContaminatedSeries out;
    out.y = x;
    if (spec.kind == ContaminationKind::none || spec.epsilon == 0.0) {
        return out;
    }
    Rng rng(seed);
    out.indices = detail::contamination_indices(x.n(), spec, rng);
    for (std::size_t t : out.indices) {
        const double w = detail::draw_contaminant(spec.contaminant, rng);
        out.y.values[t] =
            (spec.kind == ContaminationKind::AO) ? x[t] + w : w;
    }
    return out;
}

[[nodiscard]] inline Series contaminate(const Series& x,
                                        const ContaminationSpec& spec,
                                        std::uint64_t seed) {
    return contaminate_with_mask(x, spec, seed).y;
}

/// One classical comparison estimate; ok=false marks an aborted fit.
struct BaselineFit {
    ArmaParams params;
    bool ok = true;
};

namespace detail {

[[nodiscard]] inline double sample_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace detail

/** @brief Conditional-least-squares baseline estimate on the raw series. */
[[nodiscard]] inline BaselineFit estimate_ls(const Series& y,
                                             const ArmaSpec& spec) {
    BaselineFit out;
    out.params =
        classical_arma_fit(y, spec, detail::sample_mean(y.values));
    return out;
}

/** @brief Three-sigma-cleaned variant of the least-squares baseline.
 *
 * Samples with |y_t - median| > 3 * MADN are replaced by linear
 * interpolation between the nearest unflagged neighbours before the
 * conditional-least-squares fit; more than 50% flagged aborts the fit.
 */
[[nodiscard]] inline BaselineFit estimate_ls_cleaned(const Series& y,
                                                     const ArmaSpec& spec) {
    const std::size_t n = y.n();
    std::vector<double> centered(y.values);
    std::sort(centered.begin(), centered.end());
    const double med = (n % 2 == 1)
                           ? centered[n / 2]
                           : 0.5 * (centered[n / 2 - 1] + centered[n / 2]);
    std::vector<double> dev(n);
    for (std::size_t t = 0; t < n; ++t) dev[t] = y[t] - med;
    const double madn = normalized_mad(dev);

    std::vector<bool> flagged(n, false);
    std::size_t n_flagged = 0;
    if (madn > 0.0) {
        for (std::size_t t = 0; t < n; ++t) {
            if (std::abs(dev[t]) > 3.0 * madn) {
                flagged[t] = true;
                ++n_flagged;
            }
        }
    }
    BaselineFit out;
    if (2 * n_flagged > n) {
        out.ok = false;
        out.params.phi.assign(spec.p, 0.0);
        out.params.theta.assign(spec.q, 0.0);
        return out;
    }

    Series cleaned = y;
    std::size_t t = 0;
    while (t < n) {
        if (!flagged[t]) {
            ++t;
            continue;
        }
        std::size_t j = t;
        while (j < n && flagged[j]) ++j;  // flagged run is [t, j)
        const bool has_left = t > 0;
        const bool has_right = j < n;
        for (std::size_t k = t; k < j; ++k) {
            if (has_left && has_right) {
                const double frac = static_cast<double>(k - (t - 1)) /
                                    static_cast<double>(j - (t - 1));
                cleaned.values[k] =
                    y[t - 1] + frac * (y[j] - y[t - 1]);
            } else if (has_left) {
                cleaned.values[k] = y[t - 1];
            } else if (has_right) {
                cleaned.values[k] = y[j];
            }
        }
        t = j;
    }
    out.params = classical_arma_fit(cleaned, spec,
                                    detail::sample_mean(cleaned.values));
    return out;
}

/// Estimation method evaluated inside a Monte Carlo experiment.
struct McMethod {
    enum class Kind {
        bip_tau,       ///< full robust estimate
        bip_tau_init,  ///< the robust starting point only
        ls,            ///< conditional least squares on raw data
        ls_cleaned     ///< LS after 3-sigma flag-and-interpolate cleaning
    };
    std::string name;
    Kind kind = Kind::bip_tau;
    RhoFamily family;          ///< used by the bip kinds
    EstimateOptions options;   ///< used by the bip kinds
};

/// A contamination scenario with a display name.
struct McScenario {
    std::string name;
    ContaminationSpec contamination;
};

/// Per-method aggregate over the Monte Carlo runs; columns are the
/// estimated parameters in the order phi_1..phi_p, theta_1..theta_q, mu.
struct McMethodStats {
    std::string name;
    std::vector<double> mean;
    std::vector<double> sd;
    std::size_t runs_used = 0;
    std::size_t runs_failed = 0;
    bool high_failure_rate = false;  ///< more than 10% of runs failed
};

struct McScenarioResult {
    std::string name;
    std::vector<McMethodStats> methods;
};

struct McReport {
    std::size_t runs = 0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::vector<McScenarioResult> scenarios;
};

/** @brief Monte Carlo comparison of estimation methods across
 * contamination scenarios.
 *
 * Replicates are generated with per-run seeds derived from the master
 * seed; aggregation is performed in replicate-index order, so the report
 * is bit-identical for a given seed regardless of scheduling.  Failed
 * runs (estimator exceptions or aborted cleaning) are excluded and
 * counted.  The robust estimate and its starting point share one
 * estimator call per run when both are requested with identical settings.
 */
[[nodiscard]] inline McReport run_monte_carlo(
    const ArmaParams& model, const ArmaSpec& est_spec,
    const std::vector<McScenario>& scenarios,
    const std::vector<McMethod>& methods, std::size_t runs, std::size_t n,
    double innovation_sigma, std::uint64_t seed, std::size_t threads = 1) {
    if (runs == 0) throw std::invalid_argument("run_monte_carlo: runs == 0");
    if (scenarios.empty()) {
        throw std::invalid_argument("run_monte_carlo: no scenarios");
    }

    const std::size_t k = est_spec.p + est_spec.q + 1;
    McReport report;
    report.runs = runs;
    report.n = n;
    report.seed = seed;

    auto params_to_row = [&](const ArmaParams& b) {
        std::vector<double> row;
        row.reserve(k);
        for (std::size_t i = 0; i < est_spec.p; ++i) {
            row.push_back(i < b.phi.size() ? b.phi[i] : 0.0);
        }
        for (std::size_t j = 0; j < est_spec.q; ++j) {
            row.push_back(j < b.theta.size() ? b.theta[j] : 0.0);
        }
        row.push_back(b.mu);
        return row;
    };

    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        McScenarioResult sres;
        sres.name = scenarios[s].name;

        // values[m][run] = parameter row of method m in that run (empty =
        // failed); filled in run order, reduced afterwards.
        std::vector<std::vector<std::vector<double>>> values(
            methods.size(),
            std::vector<std::vector<double>>(runs));

        auto do_run = [&](std::size_t run) {
            const std::uint64_t run_seed = derive_seed(
                seed, (static_cast<std::uint64_t>(s) << 32) | run);
            const Series x = generate_arma(model, n, innovation_sigma,
                                           derive_seed(run_seed, 0));
            const Series y = contaminate(x, scenarios[s].contamination,
                                         derive_seed(run_seed, 1));

            // Cache full robust estimates so an init method with the same
            // settings does not re-run the estimator.
            std::vector<std::optional<EstimationResult>> robust_cache(
                methods.size());
            auto robust_result = [&](std::size_t m)
                -> const std::optional<EstimationResult>& {
                if (!robust_cache[m]) {
                    // Reuse an already-computed result with identical
                    // settings (same c1 and options).
                    for (std::size_t o = 0; o < m; ++o) {
                        if (!robust_cache[o]) continue;
                        const McMethod& a = methods[m];
                        const McMethod& b = methods[o];
                        if (a.family.c1 == b.family.c1 &&
                            a.options.p_long == b.options.p_long &&
                            a.options.use_forward_backward ==
                                b.options.use_forward_backward &&
                            a.options.grid_step == b.options.grid_step &&
                            a.options.q_long == b.options.q_long) {
                            robust_cache[m] = robust_cache[o];
                            return robust_cache[m];
                        }
                    }
                    try {
                        robust_cache[m] = estimate_bip_tau(
                            y, est_spec, methods[m].family,
                            methods[m].options);
                    } catch (const std::exception&) {
                        robust_cache[m] = std::nullopt;
                        return robust_cache[m];
                    }
                }
                return robust_cache[m];
            };

            for (std::size_t m = 0; m < methods.size(); ++m) {
                try {
                    switch (methods[m].kind) {
                        case McMethod::Kind::bip_tau: {
                            const auto& r = robust_result(m);
                            if (r) values[m][run] = params_to_row(r->beta_star);
                            break;
                        }
                        case McMethod::Kind::bip_tau_init: {
                            const auto& r = robust_result(m);
                            if (r) {
                                values[m][run] = params_to_row(r->start_point);
                            }
                            break;
                        }
                        case McMethod::Kind::ls: {
                            const BaselineFit f = estimate_ls(y, est_spec);
                            if (f.ok) values[m][run] = params_to_row(f.params);
                            break;
                        }
                        case McMethod::Kind::ls_cleaned: {
                            const BaselineFit f =
                                estimate_ls_cleaned(y, est_spec);
                            if (f.ok) values[m][run] = params_to_row(f.params);
                            break;
                        }
                    }
                } catch (const std::exception&) {
                    // failed run: leave the row empty
                }
            }
        };

        // Each replicate writes only its own values[m][run] slots, so runs
        // may execute on any number of threads without changing the report.
        const std::size_t workers =
            std::min(std::max<std::size_t>(threads, 1), runs);
        if (workers <= 1) {
            for (std::size_t run = 0; run < runs; ++run) do_run(run);
        } else {
            std::atomic<std::size_t> next{0};
            std::exception_ptr first_error;
            std::mutex error_mutex;
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    for (std::size_t run;
                         (run = next.fetch_add(1)) < runs;) {
                        try {
                            do_run(run);
                        } catch (...) {
                            const std::lock_guard<std::mutex> lock(
                                error_mutex);
                            if (!first_error) {
                                first_error = std::current_exception();
                            }
                        }
                    }
                });
            }
            for (std::thread& t : pool) t.join();
            if (first_error) std::rethrow_exception(first_error);
        }

        for (std::size_t m = 0; m < methods.size(); ++m) {
            McMethodStats stats;
            stats.name = methods[m].name;
            stats.mean.assign(k, 0.0);
            stats.sd.assign(k, 0.0);
            for (std::size_t run = 0; run < runs; ++run) {
                if (values[m][run].empty()) {
                    ++stats.runs_failed;
                    continue;
                }
                ++stats.runs_used;
                for (std::size_t c = 0; c < k; ++c) {
                    stats.mean[c] += values[m][run][c];
                }
            }
            if (stats.runs_used > 0) {
                for (double& v : stats.mean) {
                    v /= static_cast<double>(stats.runs_used);
                }
                if (stats.runs_used > 1) {
                    for (std::size_t run = 0; run < runs; ++run) {
                        if (values[m][run].empty()) continue;
                        for (std::size_t c = 0; c < k; ++c) {
                            const double d =
                                values[m][run][c] - stats.mean[c];
                            stats.sd[c] += d * d;
                        }
                    }
                    for (double& v : stats.sd) {
                        v = std::sqrt(
                            v / static_cast<double>(stats.runs_used - 1));
                    }
                }
            }
            stats.high_failure_rate =
                10 * stats.runs_failed > runs;  // strictly more than 10%
            sres.methods.push_back(std::move(stats));
        }
        report.scenarios.push_back(std::move(sres));
    }
    return report;
}

/// Maximum- and quantile-bias curves of the robust AR(1) estimate.
struct BiasCurves {
    std::vector<double> eps_grid;
    std::vector<double> cw_grid;
    /// max over runs of |phi_hat - phi| at each (epsilon, c_w) pair
    std::vector<std::vector<double>> max_bias_surface;
    std::vector<double> alphas;  ///< requested quantile levels in percent
    /// qbc[a][e] = sup over c_w of the alpha-quantile of |phi_hat - phi|
    std::vector<std::vector<double>> qbc;
    std::vector<double> mbc;  ///< = QBC at alpha = 100
};

/** @brief Monte Carlo bias curves for an AR(1) model under independent
 * additive outliers with point-mass amplitude +-c_w.
 *
 * For each (epsilon, c_w) the per-run absolute estimation errors are
 * collected; MBC(eps) is the worst error over runs and over the c_w grid,
 * QBC_alpha(eps) the alpha-percent order statistic at the worst c_w.
 */
[[nodiscard]] inline BiasCurves bias_curves(
    const ArmaParams& model, const std::vector<double>& eps_grid,
    const std::vector<double>& cw_grid, std::size_t n, std::size_t runs,
    const std::vector<double>& alphas, std::uint64_t seed,
    const RhoFamily& family, const EstimateOptions& options = {}) {
    if (model.p() != 1 || model.q() != 0) {
        throw std::invalid_argument(
            "bias_curves: curves are defined for a scalar AR(1) model");
    }
    if (eps_grid.empty() || cw_grid.empty() || runs == 0) {
        throw std::invalid_argument("bias_curves: empty grid or zero runs");
    }
    const double phi_true = model.phi[0];
    const ArmaSpec spec{1, 0};

    BiasCurves out;
    out.eps_grid = eps_grid;
    out.cw_grid = cw_grid;
    out.alphas = alphas;
    out.max_bias_surface.assign(eps_grid.size(),
                                std::vector<double>(cw_grid.size(), 0.0));
    out.qbc.assign(alphas.size(), std::vector<double>(eps_grid.size(), 0.0));
    out.mbc.assign(eps_grid.size(), 0.0);

    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
        std::vector<std::vector<double>> quantiles_at_cw(
            alphas.size(), std::vector<double>(cw_grid.size(), 0.0));
        for (std::size_t c = 0; c < cw_grid.size(); ++c) {
            ContaminationSpec cont;
            cont.kind = ContaminationKind::AO;
            cont.epsilon = eps_grid[e];
            cont.temporal = TemporalPattern::isolated;
            cont.contaminant = ContaminantDist::point_mass(cw_grid[c]);

            std::vector<double> errors;
            errors.reserve(runs);
            for (std::size_t run = 0; run < runs; ++run) {
                const std::uint64_t run_seed = derive_seed(
                    seed, (static_cast<std::uint64_t>(e) << 40) |
                              (static_cast<std::uint64_t>(c) << 20) | run);
                const Series x =
                    generate_arma(model, n, 1.0, derive_seed(run_seed, 0));
                const Series y =
                    contaminate(x, cont, derive_seed(run_seed, 1));
                try {
                    const EstimationResult r =
                        estimate_bip_tau(y, spec, family, options);
                    errors.push_back(
                        std::abs(r.beta_star.phi[0] - phi_true));
                } catch (const std::exception&) {
                    // failed run excluded
                }
            }
            if (errors.empty()) continue;
            std::sort(errors.begin(), errors.end());
            out.max_bias_surface[e][c] = errors.back();
            for (std::size_t a = 0; a < alphas.size(); ++a) {
                const auto rank = static_cast<std::size_t>(std::ceil(
                    alphas[a] * static_cast<double>(errors.size()) / 100.0));
                quantiles_at_cw[a][c] =
                    errors[std::min(std::max<std::size_t>(rank, 1),
                                    errors.size()) - 1];
            }
        }
        out.mbc[e] = *std::max_element(out.max_bias_surface[e].begin(),
                                       out.max_bias_surface[e].end());
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            out.qbc[a][e] = *std::max_element(quantiles_at_cw[a].begin(),
                                              quantiles_at_cw[a].end());
        }
    }
    return out;
}

}  // namespace robustarma
