#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "robustarma/arma.hpp"
#include "robustarma/ar.hpp"
#include "robustarma/innovations.hpp"
#include "robustarma/polynomial.hpp"
#include "robustarma/rng.hpp"
#include "robustarma/scale.hpp"
#include "robustarma/score.hpp"
#include "robustarma/sim.hpp"
#include "robustarma/types.hpp"
#include "test_support.hpp"

using robustarma::ArmaParams;
using robustarma::ArmaSpec;
using robustarma::BaselineFit;
using robustarma::Branch;
using robustarma::EstimateOptions;
using robustarma::EstimationResult;
using robustarma::MinimizeOptions;
using robustarma::MinimizeResult;
using robustarma::RhoFamily;
using robustarma::Series;
using robustarma::classical_arma_fit;
using robustarma::estimate_bip_tau;
using robustarma::generate_arma;
using robustarma::make_quadratic_family;
using robustarma::make_rho_family;
using robustarma::minimize_tau_objective;
using robustarma::robust_starting_point;
using robustarma::roots_within_margin;

namespace {

/// tau-scale of the branch residuals at a fixed candidate, the quantity
/// minimize_tau_objective drives down.
double objective_at(const Series& y, const ArmaParams& cand, Branch branch,
                    const RhoFamily& family) {
    std::vector<double> centered(y.values);
    for (double& v : centered) v -= cand.mu;
    const robustarma::ScaleValue my = robustarma::m_scale(centered, family);
    const double sigma_tau_y = robustarma::tau_scale(centered, my.sigma, family);
    const auto eval = robustarma::detail::evaluate_objective(
        y, cand, branch, family, sigma_tau_y, /*q_long=*/100, /*margin=*/0.0);
    REQUIRE(eval.has_value());
    return eval->tau;
}

ArmaParams arma11(double phi, double theta, double mu = 0.0) {
    ArmaParams p;
    p.phi = {phi};
    p.theta = {theta};
    p.mu = mu;
    return p;
}

}  // namespace

TEST_CASE("quadratic-family minimizer lands on a local minimum of the "
          "residual RMS") {
    const RhoFamily quad = make_quadratic_family();
    const ArmaParams truth = arma11(0.6, -0.5);
    const Series y = generate_arma(truth, 600, 1.0, 42u);

    const MinimizeResult fit =
        minimize_tau_objective(y, truth, Branch::ARMA, quad);
    REQUIRE(fit.converged);
    const double at_min =
        objective_at(y, fit.params, Branch::ARMA, quad);

    // Perturbing each coordinate by +-0.01 must not reduce the objective
    // beyond numerical slack: the fit is a local minimum.
    for (int coord = 0; coord < 2; ++coord) {
        for (double step : {-0.01, 0.01}) {
            ArmaParams cand = fit.params;
            if (coord == 0) {
                cand.phi[0] += step;
            } else {
                cand.theta[0] += step;
            }
            if (!roots_within_margin(cand, 0.0)) continue;
            const double perturbed = objective_at(y, cand, Branch::ARMA, quad);
            CHECK(perturbed >= at_min - 1e-10);
        }
    }
}

TEST_CASE("minimizer never increases the objective and stays stationary") {
    const RhoFamily family = make_rho_family(0.405);
    const ArmaParams truth = arma11(0.6, -0.5);
    const Series y = generate_arma(truth, 500, 1.0, 99u);

    const ArmaParams start = arma11(0.3, -0.2);
    for (Branch branch : {Branch::ARMA, Branch::BIP}) {
        const double at_start = objective_at(y, start, branch, family);
        const MinimizeResult fit =
            minimize_tau_objective(y, start, branch, family);
        CHECK(fit.sigma_tau <= at_start + 1e-12);
        CHECK(roots_within_margin(fit.params, 0.0));
        CHECK(fit.iterations >= 1);
    }
}

TEST_CASE("minimizer rejects a start outside the admissible region") {
    const RhoFamily family = make_rho_family(0.405);
    const Series y = generate_arma(arma11(0.5, 0.0), 200, 1.0, 5u);
    CHECK_THROWS_AS(
        minimize_tau_objective(y, arma11(1.05, 0.2), Branch::ARMA, family),
        std::invalid_argument);
    CHECK_THROWS_AS(
        minimize_tau_objective(y, arma11(0.2, 1.05), Branch::BIP, family),
        std::invalid_argument);
}

TEST_CASE("full estimate is shift-equivariant") {
    const RhoFamily family = make_rho_family(0.405);
    const ArmaParams truth = arma11(0.6, -0.5);
    const Series y = generate_arma(truth, 500, 1.0, 1234u);
    Series shifted = y;
    for (double& v : shifted.values) v += 1000.0;

    const ArmaSpec spec{1, 1};
    const EstimationResult a = estimate_bip_tau(y, spec, family);
    const EstimationResult b = estimate_bip_tau(shifted, spec, family);

    CHECK(std::abs(a.beta_star.phi[0] - b.beta_star.phi[0]) < 1e-6);
    CHECK(std::abs(a.beta_star.theta[0] - b.beta_star.theta[0]) < 1e-6);
    CHECK(std::abs((b.beta_star.mu - a.beta_star.mu) - 1000.0) < 1e-6);
    CHECK(std::abs(a.sigma_tau_star - b.sigma_tau_star) < 1e-6);
    CHECK(a.branch == b.branch);
}

TEST_CASE("clean ARMA(1,1) estimate recovers the generating parameters") {
    const RhoFamily family = make_rho_family(0.405);
    const ArmaParams truth = arma11(0.6, -0.5);
    const Series y = generate_arma(truth, 2000, 1.0, 777u);

    const EstimationResult r = estimate_bip_tau(y, ArmaSpec{1, 1}, family);
    REQUIRE(r.converged);
    CHECK(std::abs(r.beta_star.phi[0] - 0.6) < 0.06);
    CHECK(std::abs(r.beta_star.theta[0] + 0.5) < 0.08);
    CHECK(std::abs(r.beta_star.mu) < 0.2);
    CHECK(roots_within_margin(r.beta_star));
    CHECK(r.sigma_tau_star > 0.0);
    // Both branch fits are reported alongside the winner.
    CHECK(r.sigma_tau_star ==
          std::min(r.sigma_arma, r.sigma_bip));
    if (r.branch == Branch::ARMA) {
        CHECK(r.beta_star.phi[0] == r.beta_arma.phi[0]);
    } else {
        CHECK(r.beta_star.phi[0] == r.beta_bip.phi[0]);
    }
}

TEST_CASE("minimizer basin is stable under a perturbed start") {
    const RhoFamily family = make_rho_family(0.405);
    const ArmaParams truth = arma11(0.6, -0.5);
    const Series y = generate_arma(truth, 800, 1.0, 31u);

    const MinimizeResult from_truth =
        minimize_tau_objective(y, truth, Branch::ARMA, family);
    const MinimizeResult from_near =
        minimize_tau_objective(y, arma11(0.55, -0.45), Branch::ARMA, family);
    REQUIRE(from_truth.converged);
    REQUIRE(from_near.converged);
    CHECK(std::abs(from_truth.params.phi[0] - from_near.params.phi[0]) < 0.02);
    CHECK(std::abs(from_truth.params.theta[0] - from_near.params.theta[0]) <
          0.02);
}

TEST_CASE("pure AR specs delegate to the recursive grid fit") {
    const RhoFamily family = make_rho_family(0.405);
    ArmaParams model;
    model.phi = {0.6, -0.25};
    const Series y = generate_arma(model, 500, 1.0, 2024u);

    const EstimationResult viaspec =
        estimate_bip_tau(y, ArmaSpec{2, 0}, family);
    const robustarma::ArFitTrace direct =
        robustarma::estimate_ar_durbin_levinson(y, 2, family);

    REQUIRE(viaspec.beta_star.phi.size() == 2);
    CHECK(viaspec.beta_star.phi[0] == direct.phi[0]);
    CHECK(viaspec.beta_star.phi[1] == direct.phi[1]);
    CHECK(viaspec.beta_star.mu == direct.mu);
    CHECK(viaspec.sigma_tau_star == direct.sigma_tau_star);
    CHECK(viaspec.branch == direct.branch_star);
    CHECK(viaspec.iterations == 0);
    CHECK(viaspec.converged);

    const EstimationResult fb = estimate_bip_tau(y, ArmaSpec{2, 0}, family, [] {
        EstimateOptions o;
        o.use_forward_backward = true;
        return o;
    }());
    const robustarma::ArFitTrace direct_fb =
        robustarma::estimate_ar_forward_backward(y, 2, family);
    CHECK(fb.beta_star.phi[0] == direct_fb.phi[0]);
    CHECK(fb.beta_star.phi[1] == direct_fb.phi[1]);
}

TEST_CASE("series shorter than p+q+1 is rejected") {
    const RhoFamily family = make_rho_family(0.405);
    Series tiny{std::vector<double>{1.0, 2.0}};
    CHECK_THROWS_AS(estimate_bip_tau(tiny, ArmaSpec{1, 1}, family),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_bip_tau(tiny, ArmaSpec{2, 0}, family),
                    std::invalid_argument);
}

TEST_CASE("classical fit recovers clean parameters and flags the fallback") {
    const ArmaParams truth = arma11(0.6, -0.5);
    const Series y = generate_arma(truth, 1500, 1.0, 11u);

    bool fallback = true;
    const ArmaParams fit =
        classical_arma_fit(y, ArmaSpec{1, 1}, 0.0, 0.01, &fallback);
    CHECK_FALSE(fallback);
    CHECK(std::abs(fit.phi[0] - 0.6) < 0.08);
    CHECK(std::abs(fit.theta[0] + 0.5) < 0.10);
    CHECK(roots_within_margin(fit));

    // Far too short for the long-AR regression stage: the fit falls back
    // to a pure AR start but still returns admissible parameters.
    const Series tiny = generate_arma(truth, 8, 1.0, 12u);
    bool tiny_fallback = false;
    const ArmaParams tiny_fit =
        classical_arma_fit(tiny, ArmaSpec{1, 1}, 0.0, 0.01, &tiny_fallback);
    CHECK(tiny_fallback);
    CHECK(roots_within_margin(tiny_fit));

    // p = q = 0 returns the location-only model untouched.
    const ArmaParams loc = classical_arma_fit(y, ArmaSpec{0, 0}, 3.5);
    CHECK(loc.phi.empty());
    CHECK(loc.theta.empty());
    CHECK(loc.mu == 3.5);
}

TEST_CASE("robust starting point approximates the classical fit on clean "
          "data") {
    const RhoFamily family = make_rho_family(0.405);
    const ArmaParams truth = arma11(0.6, -0.5);
    const Series y = generate_arma(truth, 1500, 1.0, 555u);

    const ArmaParams robust_start =
        robust_starting_point(y, ArmaSpec{1, 1}, family);
    const ArmaParams classical =
        classical_arma_fit(y, ArmaSpec{1, 1}, 0.0);
    CHECK(std::abs(robust_start.phi[0] - classical.phi[0]) < 0.05);
    CHECK(std::abs(robust_start.theta[0] - classical.theta[0]) < 0.08);
    CHECK(roots_within_margin(robust_start));

    Series tiny{std::vector<double>(8, 0.0)};
    CHECK_THROWS_AS(robust_starting_point(tiny, ArmaSpec{1, 1}, family),
                    std::invalid_argument);
}

TEST_CASE("additive outliers barely move the robust ARMA estimate but ruin "
          "the classical one") {
    const RhoFamily family = make_rho_family(0.405);
    const ArmaParams truth = arma11(0.6, -0.5);
    const Series x = generate_arma(truth, 1000, 1.0, 4242u);

    robustarma::ContaminationSpec cont;
    cont.kind = robustarma::ContaminationKind::AO;
    cont.epsilon = 0.10;
    cont.temporal = robustarma::TemporalPattern::isolated;
    cont.contaminant = robustarma::ContaminantDist::normal(10.0);
    const Series y = robustarma::contaminate(x, cont, 4243u);

    const EstimationResult robust =
        estimate_bip_tau(y, ArmaSpec{1, 1}, family);
    const BaselineFit raw_ls = robustarma::estimate_ls(y, ArmaSpec{1, 1});
    REQUIRE(raw_ls.ok);

    const double robust_err = std::abs(robust.beta_star.phi[0] - 0.6) +
                              std::abs(robust.beta_star.theta[0] + 0.5);
    const double ls_err = std::abs(raw_ls.params.phi[0] - 0.6) +
                          std::abs(raw_ls.params.theta[0] + 0.5);
    CHECK(robust_err < 0.25);
    CHECK(ls_err > 2.0 * robust_err);
}
