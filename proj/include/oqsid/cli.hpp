// cli.hpp — Command-line front end: simulate, identify, sweep-noise, verify-formulas, models

#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "oqsid/dynamics.hpp"
#include "oqsid/era.hpp"
#include "oqsid/estimate.hpp"
#include "oqsid/models.hpp"
#include "oqsid/xfer.hpp"

namespace oqsid::cli {

namespace detail {

inline std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw validation_error(what + ": cannot parse '" + tok + "' as a number");
        }
    }
    if (out.empty()) throw validation_error(what + ": empty list");
    return out;
}

inline ParamModel load_model(const std::string& id, const std::string& file) {
    if (!id.empty() && !file.empty())
        throw validation_error("give either --model or --model-file, not both");
    if (!id.empty()) return builtin_model(id);
    if (!file.empty()) {
        std::ifstream is(file);
        if (!is) throw validation_error("cannot open model file '" + file + "'");
        nlohmann::json j;
        try {
            is >> j;
        } catch (const nlohmann::json::exception& e) {
            throw validation_error("model file '" + file + "': " + e.what());
        }
        return model_from_json(j);
    }
    throw validation_error("a model is required (--model <id> or --model-file <path>)");
}

inline Eigen::VectorXd resolve_theta(const ParamModel& model, const std::string& theta_csv) {
    if (theta_csv.empty()) {
        if (model.theta_nominal.size() != model.n_params())
            throw validation_error("model '" + model.name +
                                   "' has no nominal θ; pass --theta explicitly");
        return model.theta_nominal;
    }
    const auto vals = parse_double_list(theta_csv, "--theta");
    if (static_cast<int>(vals.size()) != model.n_params())
        throw validation_error("--theta: expected " + std::to_string(model.n_params()) +
                               " values, got " + std::to_string(vals.size()));
    return Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

inline OrderPolicy parse_order_policy(const std::string& text) {
    if (text.empty() || text == "model") return OrderPolicy::model_order();
    if (text == "threshold") return OrderPolicy::threshold();
    if (text.rfind("threshold:", 0) == 0)
        return OrderPolicy::threshold(std::stod(text.substr(10)));
    try {
        std::size_t pos = 0;
        const int n = std::stoi(text, &pos);
        if (pos == text.size() && n >= 1) return OrderPolicy::fixed(n);
    } catch (const std::exception&) {
    }
    throw validation_error("--order: expected 'model', 'threshold[:eps]', or a positive integer");
}

inline void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(path);
    if (!os) throw validation_error("cannot open output file '" + path + "'");
    os << text;
}

inline TraceSet simulate_model(const ParamModel& model, const Eigen::VectorXd& theta, double dt,
                               double t_f, double sigma, std::uint64_t seed) {
    if (dt <= 0.0) throw validation_error("--dt must be positive");
    if (t_f < dt) throw validation_error("--tf must be at least dt");
    AffineLTI full = assemble_generator(model, theta, *model.algebra);
    AffineLTI restr = restrict(full, accessible_set(full));

    // the 6–8× oversampling heuristic: warn past π/(4·max|Im λ(Ã)|)
    const Eigen::VectorXcd eigs = Eigen::EigenSolver<Eigen::MatrixXd>(restr.A, false).eigenvalues();
    const double wmax = eigs.imag().cwiseAbs().maxCoeff();
    if (wmax > 0.0 && dt > M_PI / (4.0 * wmax))
        std::cerr << "warning: dt = " << dt << " exceeds the sampling guideline pi/(4*"
                  << wmax << ") = " << M_PI / (4.0 * wmax) << "; traces may be undersampled\n";

    const int n_steps = static_cast<int>(std::llround(t_f / dt));
    TraceSet traces = simulate_traces(restr, dt, n_steps);
    if (sigma > 0.0) traces = add_noise(traces, sigma, seed);
    return traces;
}

// Flags override config-file values; otherwise the variable keeps its default
template <typename T>
T effective(const CLI::Option* opt, const T& flag_value, const nlohmann::json& cfg,
            const std::string& key) {
    if (opt != nullptr && opt->count() > 0) return flag_value;
    if (cfg.contains(key)) {
        try {
            return cfg.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw validation_error("config key '" + key + "': " + e.what());
        }
    }
    return flag_value;
}

inline nlohmann::json load_config(const std::string& path) {
    if (path.empty()) return nlohmann::json::object();
    std::ifstream is(path);
    if (!is) throw validation_error("cannot open config file '" + path + "'");
    try {
        nlohmann::json j;
        is >> j;
        if (!j.is_object()) throw validation_error("config file must hold a JSON object");
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("config file: ") + e.what());
    }
}

// ---- verify-formulas ----------------------------------------------------------

struct VerifyCase {
    std::string model_id;
    std::string output_tag;
    int output_index;
};

inline bool verify_formulas(std::ostream& os) {
    bool all_ok = true;

    // numeric vs closed-form transfer coefficients over random admissible θ
    const std::vector<VerifyCase> cases = {
        {"energy_transfer", "z1", 0},      {"energy_transfer", "z2", 1},
        {"energy_transfer_raw", "z1", 0},  {"energy_transfer_raw", "z2", 1},
        {"dephasing_chain3", "x1", 0},     {"relaxation_chain_z", "z1", 0},
        {"relaxation_chain_x", "x1", 0},
    };
    for (const auto& vc : cases) {
        const ParamModel model = builtin_model(vc.model_id);
        auto gen = rng::derive_stream(2026, 1);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const Eigen::VectorXd th = model.random_admissible(gen);
            const RationalTF ref = model_tf_oracle(vc.model_id, th, vc.output_tag);
            AffineLTI full = assemble_generator(model, th, *model.algebra);
            AffineLTI restr = restrict(full, accessible_set(full));
            const RationalTF numeric = normalize_to_order(
                transfer_coeffs(restr.A, restr.b, restr.c.row(vc.output_index), restr.x0),
                ref.den_degree());
            worst = std::max(worst, tf_max_reldiff(numeric, ref));
        }
        const bool ok = worst < 1e-9;
        all_ok = all_ok && ok;
        os << (ok ? "ok  " : "FAIL") << "  " << vc.model_id << " " << vc.output_tag
           << "  max rel dev " << worst << "\n";
    }

    // sparse contraction assembly vs dense superoperator route
    for (const auto& id : list_builtin_models()) {
        const ParamModel model = builtin_model(id);
        auto gen = rng::derive_stream(2026, 2);
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::VectorXd th = model.random_admissible(gen);
            const AffineLTI fast = assemble_generator(model, th, *model.algebra);
            const AffineLTI dense = assemble_via_superop(model, th, *model.algebra);
            worst = std::max({worst, (fast.A - dense.A).cwiseAbs().maxCoeff(),
                              (fast.b - dense.b).cwiseAbs().maxCoeff()});
        }
        const bool ok = worst < 1e-10;
        all_ok = all_ok && ok;
        os << (ok ? "ok  " : "FAIL") << "  " << id << " superoperator cross-check  max dev "
           << worst << "\n";
    }
    return all_ok;
}

} // namespace detail

inline int run(std::vector<std::string> args) {
    CLI::App app{"Open-quantum-system identification from observable time traces"};
    app.require_subcommand(1);

    // shared option storage
    std::string model_id, model_file, config_path, out_path, theta_csv;
    std::string traces_path, order_text = "model", selection_text = "lowest_degree_first";
    std::string sigmas_text = "0,0.05,0.10,0.15", dump_sv_path;
    double dt = 0.01, tf = 60.0, sigma = 0.0, cancel_tol = 1e-7;
    int mode = 1, n_starts = 64, M = 50;
    std::uint64_t seed = 0;

    auto add_model_opts = [&](CLI::App* cmd) {
        cmd->add_option("--model", model_id, "Built-in model id (see `models list`)");
        cmd->add_option("--model-file", model_file, "JSON model description file");
        cmd->add_option("--config", config_path, "JSON config file (flags take precedence)");
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--out", out_path, "Output path ('-' for stdout)");
    };

    CLI::App* sim = app.add_subcommand("simulate", "Simulate sampled observable traces to CSV");
    add_model_opts(sim);
    auto* sim_theta = sim->add_option("--theta", theta_csv, "Comma-separated θ (default: nominal)");
    auto* sim_dt = sim->add_option("--dt", dt, "Sampling interval (us)");
    auto* sim_tf = sim->add_option("--tf", tf, "Final time (us)");
    auto* sim_sigma = sim->add_option("--sigma", sigma, "Measurement noise std dev");

    CLI::App* idf = app.add_subcommand("identify", "Identify θ from traces; emit a JSON report");
    add_model_opts(idf);
    idf->add_option("--traces", traces_path, "Trace CSV (omit to simulate inline)");
    auto* idf_theta = idf->add_option("--theta", theta_csv, "θ for inline simulation");
    auto* idf_dt = idf->add_option("--dt", dt, "Inline simulation dt (us)");
    auto* idf_tf = idf->add_option("--tf", tf, "Inline simulation final time (us)");
    auto* idf_sigma = idf->add_option("--sigma", sigma, "Inline simulation noise std dev");
    auto* idf_mode = idf->add_option("--mode", mode, "Measurement mode 1-4")
                         ->check(CLI::Range(1, 4));
    auto* idf_order = idf->add_option("--order", order_text,
                                      "Order policy: model | threshold[:eps] | <n>");
    auto* idf_starts = idf->add_option("--n-starts", n_starts, "Multi-start count");
    auto* idf_sel = idf->add_option("--selection", selection_text,
                                    "Residual selection: lowest_degree_first | all");
    auto* idf_ctol = idf->add_option("--cancel-tol", cancel_tol, "Pole-zero cancellation tol");
    idf->add_option("--dump-sv", dump_sv_path, "Write Hankel singular values to CSV");

    CLI::App* swp = app.add_subcommand("sweep-noise", "Monte-Carlo noise-robustness sweep to CSV");
    add_model_opts(swp);
    auto* swp_sigmas = swp->add_option("--sigmas", sigmas_text, "Comma-separated noise levels");
    auto* swp_M = swp->add_option("--M", M, "Instances per noise level");
    auto* swp_dt = swp->add_option("--dt", dt, "Sampling interval (us)");
    auto* swp_tf = swp->add_option("--tf", tf, "Final time (us)");
    auto* swp_mode = swp->add_option("--mode", mode, "Measurement mode 1-4")
                         ->check(CLI::Range(1, 4));
    auto* swp_starts = swp->add_option("--n-starts", n_starts, "Multi-start count");

    CLI::App* vfy = app.add_subcommand("verify-formulas",
                                       "Cross-check numeric assembly against closed forms");
    (void)vfy;

    CLI::App* mdl = app.add_subcommand("models", "Model registry commands");
    CLI::App* mdl_list = mdl->add_subcommand("list", "List built-in models");
    mdl->require_subcommand(1);

    std::vector<char*> argv;
    std::string prog = "oqsid";
    argv.push_back(prog.data());
    for (auto& a : args) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const nlohmann::json cfg = detail::load_config(config_path);
        using detail::effective;

        if (mdl_list->parsed()) {
            for (const auto& id : list_builtin_models()) {
                const ParamModel m = builtin_model(id);
                std::cout << id << "\n  parameters:";
                for (const auto& p : m.theta_names) std::cout << " " << p;
                std::cout << "\n  convention: " << m.convention_note << "\n";
            }
            return 0;
        }

        if (vfy->parsed()) return detail::verify_formulas(std::cout) ? 0 : 1;

        if (model_id.empty() && model_file.empty()) {
            model_id = cfg.value("model", "");
            model_file = cfg.value("model_file", "");
        }

        if (sim->parsed()) {
            const ParamModel model = detail::load_model(model_id, model_file);
            theta_csv = effective(sim_theta, theta_csv, cfg, "theta");
            const Eigen::VectorXd theta = detail::resolve_theta(model, theta_csv);
            dt = effective(sim_dt, dt, cfg, "dt");
            tf = effective(sim_tf, tf, cfg, "t_f");
            sigma = effective(sim_sigma, sigma, cfg, "sigma");
            const TraceSet traces = detail::simulate_model(model, theta, dt, tf, sigma, seed);
            std::ostringstream os;
            write_trace_csv(traces, os);
            detail::write_text(out_path, os.str());
            return 0;
        }

        if (idf->parsed()) {
            const ParamModel model = detail::load_model(model_id, model_file);
            EstimationConfig ec;
            ec.mode = effective(idf_mode, mode, cfg, "mode");
            order_text = effective(idf_order, order_text, cfg, "order_policy");
            ec.order_policy = detail::parse_order_policy(order_text);
            ec.n_starts = effective(idf_starts, n_starts, cfg, "n_starts");
            selection_text = effective(idf_sel, selection_text, cfg, "residual_selection");
            if (selection_text == "all")
                ec.selection = ResidualSelection::All;
            else if (selection_text != "lowest_degree_first")
                throw validation_error("--selection: expected lowest_degree_first or all");
            ec.cancel_tol = effective(idf_ctol, cancel_tol, cfg, "cancel_tol");
            ec.seed = seed;

            TraceSet traces;
            if (!traces_path.empty()) {
                traces = read_trace_csv(traces_path);
            } else {
                theta_csv = effective(idf_theta, theta_csv, cfg, "theta");
                const Eigen::VectorXd theta = detail::resolve_theta(model, theta_csv);
                dt = effective(idf_dt, dt, cfg, "dt");
                tf = effective(idf_tf, tf, cfg, "t_f");
                sigma = effective(idf_sigma, sigma, cfg, "sigma");
                traces = detail::simulate_model(model, theta, dt, tf, sigma, seed);
            }

            EstimateReport report = identify(model, traces, ec);
            if (!dump_sv_path.empty())
                write_singular_values_csv(report.singular_values, dump_sv_path);

            nlohmann::json echo;
            echo["model"] = model.name;
            echo["mode"] = ec.mode;
            echo["order_policy"] = order_text;
            echo["n_starts"] = ec.n_starts;
            echo["residual_selection"] = selection_text;
            echo["cancel_tol"] = ec.cancel_tol;
            echo["seed"] = ec.seed;
            if (traces_path.empty()) {
                echo["dt"] = dt;
                echo["t_f"] = tf;
                echo["sigma"] = sigma;
            } else {
                echo["traces"] = traces_path;
            }
            report.config_echo = echo;
            detail::write_text(out_path, report_to_json(report).dump(2) + "\n");
            return report.no_solution ? 3 : 0;
        }

        if (swp->parsed()) {
            const ParamModel model = detail::load_model(model_id, model_file);
            if (model.theta_nominal.size() != model.n_params())
                throw validation_error("sweep-noise requires a model with a nominal θ");
            sigmas_text = effective(swp_sigmas, sigmas_text, cfg, "sigmas");
            const auto sigmas = detail::parse_double_list(sigmas_text, "--sigmas");
            EstimationConfig ec;
            ec.mode = effective(swp_mode, mode, cfg, "mode");
            ec.n_starts = effective(swp_starts, n_starts, cfg, "n_starts");
            ec.dt = effective(swp_dt, dt, cfg, "dt");
            ec.t_f = effective(swp_tf, tf, cfg, "t_f");
            M = effective(swp_M, M, cfg, "M");
            const auto rows = noise_sweep(model, model.theta_nominal, sigmas, M, ec, seed);
            std::ostringstream os;
            write_sweep_csv(rows, os);
            detail::write_text(out_path, os.str());
            return 0;
        }

        throw validation_error("no subcommand given");
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

inline int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(std::move(args));
}

} // namespace oqsid::cli
