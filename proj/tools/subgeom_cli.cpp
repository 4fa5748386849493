// Command-line front end: each verb maps onto one library operation.
// Exit codes: 0 pass, 1 verdict-fail, 2 inconclusive, 64 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "subgeom/convergence.hpp"
#include "subgeom/drift.hpp"
#include "subgeom/dsmall.hpp"
#include "subgeom/errors.hpp"
#include "subgeom/models.hpp"
#include "subgeom/petrov.hpp"
#include "subgeom/rates.hpp"
#include "subgeom/transport.hpp"

using namespace subgeom;
using nlohmann::json;

namespace {

constexpr int kUsageError = 64;

void print_number(double v) { std::printf("%.17g\n", v); }

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    json spec;
    in >> spec;
    return spec;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
}

chains::DiscreteModel discrete_model_from(const json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "digit") return chains::make_digit_chain();
    if (kind == "independent") return chains::make_independent_noise_chain();
    throw std::invalid_argument("unknown discrete model kind '" + kind + "'");
}

std::function<double(double)> scalar_v_from(const json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "identity") return [](double x) { return x; };
    if (kind == "abs_power") {
        const double k = spec.at("k").get<double>();
        return [k](double x) { return std::pow(std::abs(x), k); };
    }
    throw std::invalid_argument("unknown scalar Lyapunov kind '" + kind + "'");
}

std::function<double(const chains::SegmentView&)> segment_v_from(const json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "current_sq")
        return [](const chains::SegmentView& seg) {
            const double v = seg.back();
            return v * v;
        };
    if (kind == "preset_exponential") {
        chains::ExponentialPresetParams p{};
        p.alpha = spec.at("alpha").get<double>();
        p.kappa = spec.at("kappa").get<double>();
        p.lambda_plus = spec.at("lambda_plus").get<double>();
        p.big_lambda = spec.at("big_lambda").get<double>();
        p.big_m = spec.at("big_m").get<double>();
        return chains::lyapunov_preset_exponential(p).V;
    }
    if (kind == "preset_polynomial") {
        chains::PolynomialPresetParams p{};
        p.kappa = spec.at("kappa").get<double>();
        p.lambda_plus = spec.at("lambda_plus").get<double>();
        p.big_lambda = spec.at("big_lambda").get<double>();
        p.slack = spec.value("slack", 0.1);
        return chains::lyapunov_preset_polynomial(p).V;
    }
    throw std::invalid_argument("unknown segment Lyapunov kind '" + kind + "'");
}

int run_rates(const std::string& verb, const std::string& phi_spec, double x, double y) {
    const auto phi = rates::RateFunction::parse(phi_spec);
    if (verb == "eval")
        print_number(rates::h_transform(phi, x));
    else
        print_number(rates::h_inverse(phi, y));
    return 0;
}

int run_wasserstein(const std::string& mu_path, const std::string& nu_path,
                    const std::string& metric_spec, const std::string& solver,
                    const std::string& out_path) {
    const auto mu = transport::EmpiricalMeasure::read_csv_file(mu_path);
    const auto nu = transport::EmpiricalMeasure::read_csv_file(nu_path);
    const auto metric = transport::Metric::parse(metric_spec);

    const bool use_1d = (solver == "1d") || (solver == "auto" && mu.dim() == 1 &&
                                             metric.kind() == transport::Metric::Kind::Euclidean);
    if (use_1d) {
        print_number(transport::wasserstein_1d(mu, nu, metric));
        return 0;
    }
    const auto [value, plan] = transport::wasserstein_exact(mu, nu, metric);
    print_number(value);
    if (!out_path.empty()) write_text(out_path, plan.to_json().dump(2) + "\n");
    return 0;
}

int run_simulate(const json& cfg, const std::string& out_path) {
    const auto& model_spec = cfg.at("model");
    const int n_samples = cfg.at("n_samples").get<int>();
    const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

    transport::EmpiricalMeasure marginal = [&] {
        if (model_spec.at("kind").get<std::string>() == "sdde") {
            const auto setup = harness::build_sdde_setup(model_spec, cfg.value("x0", 0.0),
                                                         cfg.value("x0", 0.0));
            chains::ContinuousModel model{"sdde", setup.spec, setup.grid, setup.dt, nullptr};
            const auto observable = cfg.value("observable", std::string("value")) == "segment"
                                        ? chains::SddeObservable::Segment
                                        : chains::SddeObservable::CurrentValue;
            return chains::sample_marginal(model, setup.x0, cfg.at("horizon").get<double>(),
                                           n_samples, seed, observable);
        }
        const auto model = discrete_model_from(model_spec);
        if (n_samples == 0) {
            if (model_spec.at("kind").get<std::string>() != "digit")
                throw std::invalid_argument("exact enumeration (n_samples = 0) needs the digit chain");
            return chains::exact_digit_marginal(cfg.value("x0", 0.0), cfg.at("n_steps").get<int>());
        }
        return chains::sample_marginal(model, cfg.value("x0", 0.0), cfg.at("n_steps").get<int>(),
                                       n_samples, seed);
    }();

    if (out_path.empty()) {
        marginal.write_csv(std::cout);
    } else {
        marginal.write_csv_file(out_path);
    }
    return 0;
}

int run_drift_check(const json& cfg, const std::string& out_path, const std::string& format) {
    const std::string check = cfg.at("check").get<std::string>();
    const auto phi = rates::RateFunction::from_json(cfg.at("phi"));
    const double K = cfg.at("K").get<double>();

    lyapunov::DriftReport report;
    lyapunov::CumulativeReport cumulative;
    bool is_cumulative = false;

    if (check == "discrete" || check == "enumerated") {
        auto model = discrete_model_from(cfg.at("model"));
        model.lyapunov = scalar_v_from(cfg.at("lyapunov"));
        const auto states = cfg.at("states").get<std::vector<double>>();
        report = (check == "enumerated")
                     ? lyapunov::check_drift_enumerated(model, phi, K, states)
                     : lyapunov::check_drift_discrete(model, phi, K, states,
                                                      cfg.value("n_mc", 1000),
                                                      cfg.at("seed").get<std::uint64_t>());
    } else if (check == "continuous") {
        const auto setup = harness::build_sdde_setup(cfg.at("model"), 0.0, 0.0);
        chains::ContinuousModel model{"sdde", setup.spec, setup.grid, setup.dt,
                                      segment_v_from(cfg.at("lyapunov"))};
        std::vector<chains::SegmentState> states;
        for (double v : cfg.at("state_values").get<std::vector<double>>())
            states.push_back(chains::SegmentState::constant_scalar(setup.grid, v));
        report = lyapunov::check_drift_continuous(model, phi, K, states,
                                                  cfg.at("horizon").get<double>(),
                                                  cfg.value("n_mc", 1000),
                                                  cfg.at("seed").get<std::uint64_t>());
    } else if (check == "cumulative") {
        auto model = discrete_model_from(cfg.at("model"));
        model.lyapunov = scalar_v_from(cfg.at("lyapunov"));
        cumulative = lyapunov::check_cumulative_drift(
            model, phi, K, cfg.at("x0").get<double>(), cfg.at("n").get<int>(),
            cfg.value("n_mc", 1000), cfg.at("seed").get<std::uint64_t>());
        is_cumulative = true;
    } else {
        throw std::invalid_argument("unknown drift check '" + check + "'");
    }

    const json out = is_cumulative ? cumulative.to_json() : report.to_json();
    if (!out_path.empty()) write_text(out_path, out.dump(2) + "\n");
    if (format == "json")
        std::cout << out.dump(2) << "\n";
    else if (!is_cumulative)
        std::cout << report.to_table();
    else
        std::cout << out.dump(2) << "\n";
    return lyapunov::verdict_exit_code(is_cumulative ? cumulative.verdict : report.verdict);
}

int run_dsmall(const json& cfg, const std::string& out_path) {
    auto model = discrete_model_from(cfg.at("model"));
    const auto metric = transport::Metric::from_json(cfg.at("metric"));
    const auto V = scalar_v_from(cfg.at("lyapunov"));
    const double R = cfg.at("R").get<double>();

    lyapunov::DsmallOptions options;
    options.seed = cfg.at("seed").get<std::uint64_t>();
    options.n_mc = cfg.value("n_mc", 512);
    options.prefer_enumeration = cfg.value("enumerate", true);

    std::optional<rates::RateFunction> phi;
    if (cfg.contains("phi")) {
        phi = rates::RateFunction::from_json(cfg.at("phi"));
        options.phi = &*phi;
        options.drift_k = cfg.value("K", 0.0);
        options.drift_k_ci95 = cfg.value("K_ci95", 0.0);
    }

    std::vector<std::pair<double, double>> pairs;
    if (cfg.contains("pairs")) {
        for (const auto& row : cfg.at("pairs"))
            pairs.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
    } else {
        const auto& box = cfg.at("pair_box");
        pairs = lyapunov::sample_level_pairs(V, R, box.at("lo").get<double>(),
                                             box.at("hi").get<double>(),
                                             box.value("count", 8), options.seed);
    }

    const auto report = lyapunov::estimate_dsmall(model, metric, V, R, pairs, options);
    if (!out_path.empty()) write_text(out_path, report.to_json().dump(2) + "\n");
    std::cout << report.to_table();
    return lyapunov::verdict_exit_code(report.verdict());
}

int run_petrov(const std::string& psi_spec, double a0, int n_max, const std::string& out_path) {
    const auto psi = rates::PsiFunction::parse(psi_spec);
    const auto report = rates::petrov_bound_check(psi, a0, n_max);
    if (!out_path.empty()) write_text(out_path, report.to_json().dump() + "\n");
    std::printf("psi=%s a0=%.17g n=%d: %s (worst margin %.3g at n=%d)\n", psi.name.c_str(), a0,
                n_max, report.all_pass ? "pass" : "FAIL", report.worst_margin, report.worst_n);
    return report.all_pass ? 0 : 1;
}

int run_converge(const json& cfg, const std::string& out_path, const std::string& format) {
    const auto config = harness::ExperimentConfig::from_json(cfg);
    const auto curve = harness::run_convergence_experiment(config);
    if (curve.surrogate_warning)
        std::fprintf(stderr,
                     "note: reference is a long-run surrogate; sampling floor %.3g applies\n",
                     curve.sampling_floor);
    if (!out_path.empty()) {
        if (format == "json")
            write_text(out_path, curve.to_json().dump(2) + "\n");
        else
            curve.write_csv_file(out_path);
    } else {
        if (format == "json")
            std::cout << curve.to_json().dump(2) << "\n";
        else
            curve.write_csv(std::cout);
    }
    return 0;
}

int run_fit(const std::string& curve_path, const std::string& phi_spec, double epsilon) {
    const auto curve = harness::ConvergenceCurve::read_csv_file(curve_path);
    const auto phi = rates::RateFunction::parse(phi_spec);
    const auto fit = harness::fit_rate_constants(curve, phi, epsilon);
    std::printf("c1 %.17g\nc2 %.17g\nresidual %.17g\n", fit.c1, fit.c2, fit.residual);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"subgeom: subgeometric Wasserstein convergence toolkit"};
    app.require_subcommand(1);

    // rates eval|invert
    auto* rates_cmd = app.add_subcommand("rates", "rate-function calculus");
    rates_cmd->require_subcommand(1);
    std::string phi_spec = "linear:1.0";
    double x_value = 1.0, y_value = 0.0;
    auto* rates_eval = rates_cmd->add_subcommand("eval", "print H_phi(x)");
    rates_eval->add_option("--phi", phi_spec, "rate spec, e.g. power:0.5");
    rates_eval->add_option("--x", x_value, "argument, >= 1")->required();
    auto* rates_invert = rates_cmd->add_subcommand("invert", "print H_phi^{-1}(y)");
    rates_invert->add_option("--phi", phi_spec, "rate spec, e.g. power:0.5");
    rates_invert->add_option("--y", y_value, "argument, >= 0")->required();

    // wasserstein
    auto* wass = app.add_subcommand("wasserstein", "distance between empirical measures");
    std::string mu_path, nu_path, metric_spec = "euclid1d", solver = "auto", wass_out;
    wass->add_option("--mu", mu_path, "CSV of value[,value...],weight rows")->required();
    wass->add_option("--nu", nu_path, "CSV of value[,value...],weight rows")->required();
    wass->add_option("--metric", metric_spec, "discrete|euclid1d|deuclid:<b>|dsup:<b>");
    wass->add_option("--solver", solver, "auto|exact|1d");
    wass->add_option("--out", wass_out, "write the optimal plan as JSON");

    // config-driven verbs
    std::string config_path, out_path, format = "csv";
    std::optional<std::uint64_t> seed_override;
    auto add_config_flags = [&](CLI::App* cmd, bool with_format) {
        cmd->add_option("--config", config_path, "JSON experiment config")->required();
        cmd->add_option("--out", out_path, "output path");
        cmd->add_option("--seed", seed_override, "override the config seed");
        if (with_format) cmd->add_option("--format", format, "csv|json");
    };
    auto* simulate = app.add_subcommand("simulate", "sample a marginal to CSV");
    add_config_flags(simulate, false);
    auto* drift = app.add_subcommand("drift-check", "verify a Lyapunov drift inequality");
    add_config_flags(drift, true);
    auto* dsmall = app.add_subcommand("dsmall", "estimate the d-smallness coefficient");
    add_config_flags(dsmall, false);
    auto* converge = app.add_subcommand("converge", "run a convergence experiment");
    add_config_flags(converge, true);

    // petrov
    auto* petrov = app.add_subcommand("petrov", "check the recursion bound a_n <= g^{-1}(n)");
    std::string psi_spec = "linear";
    double a0 = 1.0;
    int n_max = 100;
    std::string petrov_out;
    petrov->add_option("--psi", psi_spec, "linear|square|min2t");
    petrov->add_option("--a0", a0, "starting value in [0,1]");
    petrov->add_option("--n", n_max, "number of iterates");
    petrov->add_option("--out", petrov_out, "write the report as JSON");

    // fit
    auto* fit = app.add_subcommand("fit", "fit rate-bound constants to a curve CSV");
    std::string curve_path, fit_phi = "linear:1.0";
    double fit_epsilon = 0.1;
    fit->add_option("--curve", curve_path, "curve CSV from `converge`")->required();
    fit->add_option("--phi", fit_phi, "rate spec");
    fit->add_option("--epsilon", fit_epsilon, "epsilon in (0,1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kUsageError;
    }

    try {
        auto load_with_seed = [&]() {
            json cfg = load_json(config_path);
            if (seed_override) cfg["seed"] = *seed_override;
            return cfg;
        };
        if (rates_eval->parsed()) return run_rates("eval", phi_spec, x_value, y_value);
        if (rates_invert->parsed()) return run_rates("invert", phi_spec, x_value, y_value);
        if (wass->parsed()) return run_wasserstein(mu_path, nu_path, metric_spec, solver, wass_out);
        if (simulate->parsed()) return run_simulate(load_with_seed(), out_path);
        if (drift->parsed()) return run_drift_check(load_with_seed(), out_path, format);
        if (dsmall->parsed()) return run_dsmall(load_with_seed(), out_path);
        if (converge->parsed()) return run_converge(load_with_seed(), out_path, format);
        if (petrov->parsed()) return run_petrov(psi_spec, a0, n_max, petrov_out);
        if (fit->parsed()) return run_fit(curve_path, fit_phi, fit_epsilon);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsageError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kUsageError;
}
