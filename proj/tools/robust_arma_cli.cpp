/// Command-line front end: estimation, outlier cleaning, simulation, Monte
/// Carlo experiments, bias curves, influence curves, order selection, and
/// efficiency evaluation on plain-text series files.
///
/// Option precedence: command-line flags > JSON config file (--config) >
/// built-in defaults.  Exit codes: 0 success, 2 usage/configuration error,
/// 3 malformed data, 4 numerical failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "robustarma/analysis.hpp"
#include "robustarma/ar.hpp"
#include "robustarma/arma.hpp"
#include "robustarma/innovations.hpp"
#include "robustarma/io.hpp"
#include "robustarma/presets.hpp"
#include "robustarma/score.hpp"
#include "robustarma/sim.hpp"
#include "robustarma/types.hpp"

namespace {

using namespace robustarma;

/// Fills options the user did not pass from a JSON config file, giving the
/// documented flags > config > defaults precedence.
class ConfigFallback {
public:
    void attach(CLI::App* sub) {
        sub_ = sub;
        sub_->add_option("--config", path_,
                         "JSON config file; explicit flags take precedence");
    }

    /// Load the file (if any); called first inside each command callback.
    void load() {
        cfg_ = nlohmann::json::object();
        if (path_.empty()) return;
        std::ifstream in(path_);
        if (!in) throw parse_error("cannot open config '" + path_ + "'", 0);
        try {
            in >> cfg_;
        } catch (const nlohmann::json::exception& e) {
            throw parse_error("config '" + path_ + "': " + e.what(), 0);
        }
        if (!cfg_.is_object()) {
            throw parse_error("config '" + path_ + "': expected an object", 0);
        }
        for (const auto& item : cfg_.items()) {
            if (!sub_->get_option_no_throw("--" + item.key())) {
                throw std::invalid_argument("config key '" + item.key() +
                                            "' is not an option of '" +
                                            sub_->get_name() + "'");
            }
        }
    }

    template <typename T>
    void apply(const std::string& name, T& var) const {
        if (!cfg_.contains(name)) return;
        if (sub_->get_option("--" + name)->count() > 0) return;
        try {
            var = cfg_.at(name).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument("config key '" + name +
                                        "': " + e.what());
        }
    }

    /// True when the option was given on the command line or in the config.
    bool is_set(const std::string& name) const {
        return sub_->get_option("--" + name)->count() > 0 ||
               cfg_.contains(name);
    }

private:
    CLI::App* sub_ = nullptr;
    std::string path_;
    nlohmann::json cfg_ = nlohmann::json::object();
};

/// ROBUST_ARMA_THREADS caps worker threads; unset means no cap.
std::size_t env_thread_cap() {
    const char* s = std::getenv("ROBUST_ARMA_THREADS");
    if (!s || !*s) return 0;
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end == s || *end != '\0' || v < 1) {
        throw std::invalid_argument(
            "ROBUST_ARMA_THREADS must be a positive integer");
    }
    return static_cast<std::size_t>(v);
}

std::size_t effective_threads(std::size_t requested) {
    if (requested == 0) {
        requested = std::max(1u, std::thread::hardware_concurrency());
    }
    const std::size_t cap = env_thread_cap();
    return cap > 0 ? std::min(requested, cap) : requested;
}

ContaminationKind parse_kind(const std::string& s) {
    if (s == "none") return ContaminationKind::none;
    if (s == "ao" || s == "AO") return ContaminationKind::AO;
    if (s == "ro" || s == "RO") return ContaminationKind::RO;
    if (s == "innovation") return ContaminationKind::innovation;
    throw std::invalid_argument("unknown contamination kind '" + s + "'");
}

TemporalPattern parse_pattern(const std::string& s) {
    if (s == "isolated") return TemporalPattern::isolated;
    if (s == "patchy") return TemporalPattern::patchy;
    if (s == "spaced" || s == "equally_spaced") {
        return TemporalPattern::equally_spaced;
    }
    throw std::invalid_argument("unknown temporal pattern '" + s + "'");
}

ContaminantDist parse_dist(const std::string& s, double amplitude) {
    if (s == "normal") return ContaminantDist::normal(amplitude);
    if (s == "half_normal") return ContaminantDist::half_normal(amplitude);
    if (s == "point_mass") return ContaminantDist::point_mass(amplitude);
    if (s == "constant") return ContaminantDist::constant(amplitude);
    throw std::invalid_argument("unknown contaminant distribution '" + s +
                                "'");
}

OrderCriterion parse_criterion(const std::string& s) {
    if (s == "aic" || s == "AIC") return OrderCriterion::AIC;
    if (s == "sic" || s == "SIC") return OrderCriterion::SIC;
    if (s == "hqc" || s == "HQC") return OrderCriterion::HQC;
    throw std::invalid_argument("unknown criterion '" + s + "'");
}

/// Serialize to a file, or to stdout when no path was given.
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
    if (path.empty()) {
        fn(std::cout);
    } else {
        write_text_file(path, fn);
    }
}

void print_params(std::ostream& out, const ArmaParams& b) {
    for (std::size_t i = 0; i < b.p(); ++i) {
        out << "phi" << (i + 1) << '=' << format_full(b.phi[i]) << '\n';
    }
    for (std::size_t j = 0; j < b.q(); ++j) {
        out << "theta" << (j + 1) << '=' << format_full(b.theta[j]) << '\n';
    }
    out << "mu=" << format_full(b.mu) << '\n';
}

/// Shared model/estimation flags for commands that fit a model.
struct FitFlags {
    std::size_t p = 0;
    std::size_t q = 0;
    double c1 = kC1Efficient;
    double grid_step = 0.05;
    std::size_t q_long = 100;
    std::size_t p_long = 0;  ///< 0 = automatic (2(p+q), at least 1)
    bool forward_backward = false;

    void attach(CLI::App* sub, ConfigFallback& cfg) {
        sub->add_option("--p", p, "AR order");
        sub->add_option("--q", q, "MA order");
        sub->add_option("--c1", c1, "score tuning constant")
            ->check(CLI::PositiveNumber);
        sub->add_option("--grid_step", grid_step, "coarse grid step");
        sub->add_option("--q_long", q_long, "long-MA truncation length");
        sub->add_option("--p_long", p_long,
                        "AR order of the starting-point approximation "
                        "(0 = automatic)");
        sub->add_flag("--fb", forward_backward,
                      "average forward and backward scales (AR only)");
        cfg.attach(sub);
    }

    void apply(const ConfigFallback& cfg) {
        cfg.apply("p", p);
        cfg.apply("q", q);
        cfg.apply("c1", c1);
        cfg.apply("grid_step", grid_step);
        cfg.apply("q_long", q_long);
        cfg.apply("p_long", p_long);
        cfg.apply("fb", forward_backward);
    }

    EstimateOptions options() const {
        EstimateOptions o;
        if (p_long > 0) o.p_long = p_long;
        o.use_forward_backward = forward_backward;
        o.grid_step = grid_step;
        o.q_long = q_long;
        return o;
    }
};

/// Contamination flags shared by simulate and custom mc runs.
struct ContaminationFlags {
    std::string kind = "none";
    double epsilon = 0.0;
    std::string pattern = "isolated";
    std::size_t n_patch = 1;
    std::string dist = "normal";
    double amplitude = 1.0;

    void attach(CLI::App* sub) {
        sub->add_option("--kind", kind, "none|ao|ro");
        sub->add_option("--epsilon", epsilon, "contamination fraction");
        sub->add_option("--pattern", pattern, "isolated|patchy|spaced");
        sub->add_option("--n_patch", n_patch, "patch length");
        sub->add_option("--dist", dist,
                        "normal|half_normal|point_mass|constant");
        sub->add_option("--amplitude", amplitude,
                        "sigma_w (normal kinds) or c_w");
    }

    void apply(const ConfigFallback& cfg) {
        cfg.apply("kind", kind);
        cfg.apply("epsilon", epsilon);
        cfg.apply("pattern", pattern);
        cfg.apply("n_patch", n_patch);
        cfg.apply("dist", dist);
        cfg.apply("amplitude", amplitude);
    }

    ContaminationSpec spec() const {
        ContaminationSpec c;
        c.kind = parse_kind(kind);
        c.epsilon = epsilon;
        c.temporal = parse_pattern(pattern);
        c.n_patch = n_patch;
        c.contaminant = parse_dist(dist, amplitude);
        return c;
    }
};

void add_estimate(CLI::App& app) {
    auto sub = app.add_subcommand(
        "estimate", "fit the robust estimator to a series file");
    auto flags = std::make_shared<FitFlags>();
    auto cfg = std::make_shared<ConfigFallback>();
    auto input = std::make_shared<std::string>();
    flags->attach(sub, *cfg);
    sub->add_option("--input", *input, "series file")->required();
    sub->callback([=]() {
        cfg->load();
        flags->apply(*cfg);
        const Series y = read_series(*input);
        const RhoFamily family = make_rho_family(flags->c1);
        const EstimationResult r = estimate_bip_tau(
            y, ArmaSpec{flags->p, flags->q}, family, flags->options());
        print_params(std::cout, r.beta_star);
        std::cout << "sigma_tau=" << format_full(r.sigma_tau_star) << '\n'
                  << "branch=" << to_string(r.branch) << '\n'
                  << "iterations=" << r.iterations << '\n'
                  << "converged=" << (r.converged ? 1 : 0) << '\n';
    });
}

void add_clean(CLI::App& app) {
    auto sub = app.add_subcommand(
        "clean", "replace outlier-driven samples by their bounded "
                 "reconstruction");
    auto flags = std::make_shared<FitFlags>();
    auto cfg = std::make_shared<ConfigFallback>();
    auto input = std::make_shared<std::string>();
    auto output = std::make_shared<std::string>();
    flags->attach(sub, *cfg);
    sub->add_option("--input", *input, "series file")->required();
    sub->add_option("--output", *output, "cleaned series file")->required();
    sub->callback([=]() {
        cfg->load();
        flags->apply(*cfg);
        const Series y = read_series(*input);
        const RhoFamily family = make_rho_family(flags->c1);
        const EstimationResult r = estimate_bip_tau(
            y, ArmaSpec{flags->p, flags->q}, family, flags->options());
        const double sigma = sigma_from_ma_infinity(y, r.beta_star, family,
                                                    flags->q_long);
        const Series cleaned = bip_clean(y, r.beta_star, sigma, family);
        write_series(*output, cleaned);
        std::size_t modified = 0;
        for (std::size_t t = 0; t < y.n(); ++t) {
            if (cleaned[t] != y[t]) ++modified;
        }
        std::cout << "modified=" << modified << '\n'
                  << "sigma=" << format_full(sigma) << '\n'
                  << "branch=" << to_string(r.branch) << '\n';
    });
}

/// Custom-model payload for simulate/mc: either a preset or explicit
/// coefficients (regression convention).
struct ModelFlags {
    std::string preset;
    std::vector<double> phi;
    std::vector<double> theta;
    double mu = 0.0;
    double sigma = 1.0;
    std::size_t n = 0;

    void attach(CLI::App* sub, const std::string& preset_help) {
        sub->add_option("--preset", preset, preset_help);
        sub->add_option("--phi", phi, "AR coefficients (comma separated)")
            ->delimiter(',');
        sub->add_option("--theta", theta, "MA coefficients (comma separated)")
            ->delimiter(',');
        sub->add_option("--mu", mu, "process location");
        sub->add_option("--sigma", sigma, "innovation standard deviation");
        sub->add_option("--n", n, "sample size");
    }

    void apply(const ConfigFallback& cfg) {
        cfg.apply("preset", preset);
        cfg.apply("phi", phi);
        cfg.apply("theta", theta);
        cfg.apply("mu", mu);
        cfg.apply("sigma", sigma);
        cfg.apply("n", n);
    }

    ArmaParams params() const {
        ArmaParams b;
        b.phi = phi;
        b.theta = theta;
        b.mu = mu;
        return b;
    }
};

void add_simulate(CLI::App& app) {
    auto sub = app.add_subcommand(
        "simulate", "generate a (possibly contaminated) series file");
    auto cfg = std::make_shared<ConfigFallback>();
    auto model = std::make_shared<ModelFlags>();
    auto contamination = std::make_shared<ContaminationFlags>();
    auto scenario = std::make_shared<std::string>();
    auto seed = std::make_shared<std::uint64_t>(0);
    auto output = std::make_shared<std::string>();
    auto indices_path = std::make_shared<std::string>();
    model->attach(sub, "benchmark preset (table3|table4|table5|fig3)");
    contamination->attach(sub);
    sub->add_option("--scenario", *scenario,
                    "preset scenario name (default: first)");
    sub->add_option("--seed", *seed, "RNG seed");
    sub->add_option("--output", *output, "series file to write")->required();
    sub->add_option("--indices", *indices_path,
                    "optional file for the contaminated indices");
    cfg->attach(sub);
    sub->callback([=]() {
        cfg->load();
        model->apply(*cfg);
        contamination->apply(*cfg);
        cfg->apply("scenario", *scenario);
        cfg->apply("seed", *seed);
        cfg->apply("indices", *indices_path);
        if (!cfg->is_set("seed")) {
            throw std::invalid_argument("simulate: --seed is required");
        }

        ArmaParams params;
        std::size_t n = 0;
        double sigma = 1.0;
        ContaminationSpec spec;
        if (!model->preset.empty()) {
            const McPreset ps = mc_preset(model->preset);
            params = ps.params;
            n = model->n > 0 ? model->n : ps.n;
            sigma = ps.innovation_sigma;
            const McScenario* chosen = &ps.scenarios.front();
            if (!scenario->empty()) {
                chosen = nullptr;
                for (const McScenario& sc : ps.scenarios) {
                    if (sc.name == *scenario) chosen = &sc;
                }
                if (!chosen) {
                    throw std::invalid_argument("preset '" + model->preset +
                                                "' has no scenario '" +
                                                *scenario + "'");
                }
            }
            spec = chosen->contamination;
        } else {
            params = model->params();
            n = model->n;
            sigma = model->sigma;
            spec = contamination->spec();
            if (n == 0) {
                throw std::invalid_argument(
                    "simulate: --n is required without a preset");
            }
        }

        const Series x =
            generate_arma(params, n, sigma, derive_seed(*seed, 0));
        const ContaminatedSeries out =
            contaminate_with_mask(x, spec, derive_seed(*seed, 1));
        write_series(*output, out.y);
        if (!indices_path->empty()) {
            write_text_file(*indices_path, [&](std::ostream& os) {
                for (std::size_t t : out.indices) os << t << '\n';
            });
        }
        std::cout << "n=" << n << '\n'
                  << "contaminated=" << out.indices.size() << '\n';
    });
}

void add_mc(CLI::App& app) {
    auto sub = app.add_subcommand(
        "mc", "Monte Carlo method comparison across scenarios");
    auto cfg = std::make_shared<ConfigFallback>();
    auto model = std::make_shared<ModelFlags>();
    auto contamination = std::make_shared<ContaminationFlags>();
    auto flags = std::make_shared<FitFlags>();
    auto seed = std::make_shared<std::uint64_t>(0);
    auto runs = std::make_shared<std::size_t>(0);
    auto output = std::make_shared<std::string>();
    auto format = std::make_shared<std::string>("csv");
    auto threads = std::make_shared<std::size_t>(0);
    model->attach(sub, "benchmark preset (table3|table4|table5|fig3)");
    contamination->attach(sub);
    flags->attach(sub, *cfg);
    sub->add_option("--seed", *seed, "RNG seed");
    sub->add_option("--runs", *runs, "replicates (default: preset's)");
    sub->add_option("--output", *output, "report file (default: stdout)");
    sub->add_option("--format", *format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", *threads,
                    "worker threads (0 = hardware; capped by "
                    "ROBUST_ARMA_THREADS)");
    sub->callback([=]() {
        cfg->load();
        model->apply(*cfg);
        contamination->apply(*cfg);
        flags->apply(*cfg);
        cfg->apply("seed", *seed);
        cfg->apply("runs", *runs);
        cfg->apply("format", *format);
        cfg->apply("threads", *threads);
        if (!cfg->is_set("seed")) {
            throw std::invalid_argument("mc: --seed is required");
        }

        McPreset ps;
        if (!model->preset.empty()) {
            ps = mc_preset(model->preset);
            if (model->n > 0) ps.n = model->n;
        } else {
            ps.name = "custom";
            ps.params = model->params();
            ps.spec = {ps.params.p(), ps.params.q()};
            ps.n = model->n;
            ps.innovation_sigma = model->sigma;
            ps.negate_for_report = false;
            ps.default_runs = 100;
            ps.scenarios = {{"custom", contamination->spec()}};
            McMethod robust;
            robust.name = "BIP_tau";
            robust.kind = McMethod::Kind::bip_tau;
            robust.family = make_rho_family(flags->c1);
            robust.options = flags->options();
            McMethod ml;
            ml.name = "ML";
            ml.kind = McMethod::Kind::ls;
            McMethod ml3;
            ml3.name = "ML_3sigma";
            ml3.kind = McMethod::Kind::ls_cleaned;
            ps.methods = {ml, ml3, robust};
            if (ps.n == 0) {
                throw std::invalid_argument(
                    "mc: --n is required without a preset");
            }
            if (ps.params.p() + ps.params.q() == 0) {
                throw std::invalid_argument(
                    "mc: --phi/--theta required without a preset");
            }
        }
        const std::size_t n_runs = *runs > 0 ? *runs : ps.default_runs;

        McReport report = run_monte_carlo(
            ps.params, ps.spec, ps.scenarios, ps.methods, n_runs, ps.n,
            ps.innovation_sigma, *seed, effective_threads(*threads));
        if (ps.negate_for_report) {
            negate_coefficient_means(report, ps.spec.p, ps.spec.q);
        }
        emit(*output, [&](std::ostream& os) {
            if (*format == "json") {
                os << mc_to_json(report, ps.spec.p, ps.spec.q).dump(2)
                   << '\n';
            } else {
                write_mc_csv(os, report, ps.spec.p, ps.spec.q);
            }
        });
    });
}

void add_biascurve(CLI::App& app) {
    auto sub = app.add_subcommand(
        "biascurve", "maximum-bias and quantile-bias curves for AR(1)");
    auto cfg = std::make_shared<ConfigFallback>();
    auto preset_name = std::make_shared<std::string>("fig4");
    auto phi = std::make_shared<double>(0.0);
    auto n = std::make_shared<std::size_t>(0);
    auto runs = std::make_shared<std::size_t>(0);
    auto c1 = std::make_shared<double>(kC1Efficient);
    auto eps_grid = std::make_shared<std::vector<double>>();
    auto cw_grid = std::make_shared<std::vector<double>>();
    auto seed = std::make_shared<std::uint64_t>(0);
    auto output = std::make_shared<std::string>();
    auto surface = std::make_shared<std::string>();
    sub->add_option("--preset", *preset_name, "bias preset (fig4)");
    sub->add_option("--phi", *phi, "AR(1) coefficient override");
    sub->add_option("--n", *n, "sample size override");
    sub->add_option("--runs", *runs, "replicates per grid cell");
    sub->add_option("--c1", *c1, "score tuning constant")
        ->check(CLI::PositiveNumber);
    sub->add_option("--eps_grid", *eps_grid, "contamination fractions")
        ->delimiter(',');
    sub->add_option("--cw_grid", *cw_grid, "point-mass amplitudes")
        ->delimiter(',');
    sub->add_option("--seed", *seed, "RNG seed");
    sub->add_option("--output", *output, "summary CSV (default: stdout)");
    sub->add_option("--surface", *surface,
                    "optional CSV for the full (epsilon, c_w) surface");
    cfg->attach(sub);
    sub->callback([=]() {
        cfg->load();
        cfg->apply("preset", *preset_name);
        cfg->apply("phi", *phi);
        cfg->apply("n", *n);
        cfg->apply("runs", *runs);
        cfg->apply("c1", *c1);
        cfg->apply("eps_grid", *eps_grid);
        cfg->apply("cw_grid", *cw_grid);
        cfg->apply("seed", *seed);
        if (!cfg->is_set("seed")) {
            throw std::invalid_argument("biascurve: --seed is required");
        }

        BiasPreset ps = bias_preset(*preset_name);
        if (cfg->is_set("phi")) ps.params.phi = {*phi};
        if (*n > 0) ps.n = *n;
        if (!eps_grid->empty()) ps.eps_grid = *eps_grid;
        if (!cw_grid->empty()) ps.cw_grid = *cw_grid;
        const std::size_t n_runs = *runs > 0 ? *runs : ps.default_runs;

        const RhoFamily family = make_rho_family(*c1);
        const BiasCurves bc =
            bias_curves(ps.params, ps.eps_grid, ps.cw_grid, ps.n, n_runs,
                        ps.alphas, *seed, family);
        emit(*output, [&](std::ostream& os) {
            write_bias_summary_csv(os, bc);
        });
        if (!surface->empty()) {
            write_text_file(*surface, [&](std::ostream& os) {
                write_bias_surface_csv(os, bc);
            });
        }
    });
}

void add_ifcurve(CLI::App& app) {
    auto sub = app.add_subcommand(
        "ifcurve", "influence of a point-mass additive outlier on the "
                   "AR(1) estimate");
    auto cfg = std::make_shared<ConfigFallback>();
    auto phi = std::make_shared<double>(-0.5);
    auto c1 = std::make_shared<double>(kC1Efficient);
    auto cw_max = std::make_shared<double>(50.0);
    auto cw_step = std::make_shared<double>(0.1);
    auto single_sign = std::make_shared<bool>(false);
    auto output = std::make_shared<std::string>();
    sub->add_option("--phi", *phi, "AR(1) coefficient");
    sub->add_option("--c1", *c1, "score tuning constant")
        ->check(CLI::PositiveNumber);
    sub->add_option("--cw_max", *cw_max, "largest amplitude");
    sub->add_option("--cw_step", *cw_step, "grid step")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--single_sign", *single_sign,
                  "use a +c_w point mass instead of the +-c_w average");
    sub->add_option("--output", *output, "CSV file (default: stdout)");
    cfg->attach(sub);
    sub->callback([=]() {
        cfg->load();
        cfg->apply("phi", *phi);
        cfg->apply("c1", *c1);
        cfg->apply("cw_max", *cw_max);
        cfg->apply("cw_step", *cw_step);
        cfg->apply("single_sign", *single_sign);

        std::vector<double> grid;
        for (double c = 0.0; c <= *cw_max + 1e-12; c += *cw_step) {
            grid.push_back(c);
        }
        IfOptions opts;
        opts.symmetrize = !*single_sign;
        const RhoFamily family = make_rho_family(*c1);
        const IfCurve curve =
            influence_function_ar1(*phi, grid, family, opts);
        std::cout << "ges=" << format_full(curve.ges) << '\n'
                  << "ges_cw=" << format_full(curve.ges_cw) << '\n';
        emit(*output, [&](std::ostream& os) {
            write_if_csv(os, curve, *phi);
        });
    });
}

void add_order(CLI::App& app) {
    auto sub = app.add_subcommand(
        "order", "robust AR order selection by penalized tau scale");
    auto cfg = std::make_shared<ConfigFallback>();
    auto input = std::make_shared<std::string>();
    auto p_max = std::make_shared<std::size_t>(5);
    auto criterion = std::make_shared<std::string>("sic");
    auto c1 = std::make_shared<double>(kC1Efficient);
    auto grid_step = std::make_shared<double>(0.05);
    auto output = std::make_shared<std::string>();
    sub->add_option("--input", *input, "series file")->required();
    sub->add_option("--p_max", *p_max, "largest candidate order");
    sub->add_option("--criterion", *criterion, "aic|sic|hqc");
    sub->add_option("--c1", *c1, "score tuning constant")
        ->check(CLI::PositiveNumber);
    sub->add_option("--grid_step", *grid_step, "coarse grid step");
    sub->add_option("--output", *output, "IC table CSV (default: stdout)");
    cfg->attach(sub);
    sub->callback([=]() {
        cfg->load();
        cfg->apply("p_max", *p_max);
        cfg->apply("criterion", *criterion);
        cfg->apply("c1", *c1);
        cfg->apply("grid_step", *grid_step);

        const Series y = read_series(*input);
        const RhoFamily family = make_rho_family(*c1);
        const OrderSelection sel = select_order(
            y, *p_max, parse_criterion(*criterion), family, *grid_step);
        std::cout << "p_hat=" << sel.p_hat << '\n'
                  << "criterion=" << to_string(sel.criterion) << '\n';
        emit(*output, [&](std::ostream& os) { write_order_csv(os, sel); });
    });
}

void add_efficiency(CLI::App& app) {
    auto sub = app.add_subcommand(
        "efficiency", "asymptotic Gaussian efficiency for a tuning constant");
    auto cfg = std::make_shared<ConfigFallback>();
    auto c1 = std::make_shared<double>(kC1Efficient);
    sub->add_option("--c1", *c1, "score tuning constant")
        ->check(CLI::PositiveNumber);
    cfg->attach(sub);
    sub->callback([=]() {
        cfg->load();
        cfg->apply("c1", *c1);
        const RhoFamily family = make_rho_family(*c1);
        std::cout << "c1=" << format_full(*c1) << '\n'
                  << "efficiency=" << format_full(asymptotic_efficiency(family))
                  << '\n'
                  << "mixing_weight="
                  << format_full(asymptotic_mixing_weight(family)) << '\n';
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "robust_arma: bounded-influence robust ARMA estimation toolkit"};
    app.require_subcommand(1);
    add_estimate(app);
    add_clean(app);
    add_simulate(app);
    add_mc(app);
    add_biascurve(app);
    add_ifcurve(app);
    add_order(app);
    add_efficiency(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const robustarma::parse_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
