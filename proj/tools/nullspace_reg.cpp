// Command-line harness: synthetic problems, training, and the convergence /
// rate / consistency experiments, with CSV/JSON/SVG reports.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nsreg/harness.hpp"
#include "nsreg/training.hpp"

namespace {

using namespace nsreg;

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Accepts inline JSON ("{...}") or a path to a JSON file.
std::string json_text(const std::string& arg) {
    if (!arg.empty() && arg.front() == '{') return arg;
    return read_file(arg);
}

std::string prescan_config(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return argv[i + 1];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return "";
}

std::vector<double> parse_delta_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
    return out;
}

FilterSpec filter_by_name(const std::string& name, double landweber_step) {
    if (name == "tikhonov") return FilterSpec::tikhonov();
    if (name == "tsvd") return FilterSpec::truncated_svd();
    if (name == "landweber") return FilterSpec::landweber(landweber_step);
    throw CLI::ValidationError("--filter", "unknown filter '" + name + "'");
}

struct ProblemFlags {
    std::string kind = "random_rank_deficient";
    int n = 96, m = 64, rank = 48, keep_rows = 32;
    double kernel_width = 2.0;
    std::uint64_t seed = 0;
    std::string operator_csv;

    void attach(CLI::App* cmd) {
        cmd->add_option("--kind", kind, "problem kind: random_rank_deficient|deconvolution");
        cmd->add_option("--n", n, "signal dimension");
        cmd->add_option("--m", m, "measurement dimension (random_rank_deficient)");
        cmd->add_option("--rank", rank, "operator rank (random_rank_deficient)");
        cmd->add_option("--keep-rows", keep_rows, "retained rows (deconvolution)");
        cmd->add_option("--kernel-width", kernel_width, "blur width (deconvolution)");
        cmd->add_option("--problem-seed", seed, "problem seed");
        cmd->add_option("--operator-csv", operator_csv,
                        "load the operator from a CSV matrix instead");
    }

    void load(const nlohmann::json& j) {
        if (!j.contains("problem")) return;
        const auto& p = j.at("problem");
        kind = p.value("kind", kind);
        n = p.value("n", n);
        m = p.value("m", m);
        rank = p.value("rank", rank);
        keep_rows = p.value("keep_rows", keep_rows);
        kernel_width = p.value("kernel_width", kernel_width);
        seed = p.value("seed", seed);
        operator_csv = p.value("operator_csv", operator_csv);
    }

    ProblemSpec spec() const {
        ProblemSpec s;
        if (kind == "random_rank_deficient")
            s.kind = ProblemKind::RandomRankDeficient;
        else if (kind == "deconvolution")
            s.kind = ProblemKind::Deconvolution;
        else
            throw CLI::ValidationError("--kind", "unknown problem kind '" + kind + "'");
        s.n = n;
        s.m = m;
        s.rank = rank;
        s.keep_rows = keep_rows;
        s.kernel_width = kernel_width;
        s.seed = seed;
        return s;
    }

    std::shared_ptr<const DenseOperator> build() const {
        if (!operator_csv.empty())
            return std::make_shared<const DenseOperator>(load_matrix_csv(operator_csv));
        return std::make_shared<const DenseOperator>(make_problem(spec()));
    }
};

void ensure_dir(const std::string& dir) {
    if (!dir.empty()) std::filesystem::create_directories(dir);
}

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir.empty() ? "." : dir) / name).string();
}

NullSpaceNetwork load_or_zero_network(const std::string& path,
                                      const std::shared_ptr<const DenseOperator>& op) {
    if (path.empty()) return NullSpaceNetwork(make_zero_network(op->cols()), op);
    NetworkFile file = load_network_json(path);
    if (!file.operator_hash.empty() && file.operator_hash != operator_hash_hex(*op))
        throw IntegrityError("network file '" + path +
                             "' was trained against a different operator (hash mismatch)");
    return NullSpaceNetwork(std::move(file.net), op);
}

int cmd_rates(const nlohmann::json& cfg, CLI::App* cmd, const ProblemFlags& pf,
              const std::string& filter_name_arg, double landweber_step, double mu, double rho,
              double constant_d, const std::string& deltas, int trials,
              const std::string& network, const std::string& mode, const std::string& q_filter,
              double phi_exponent, double slope_tol, std::uint64_t seed,
              const std::string& out_dir) {
    (void)cfg;
    (void)cmd;
    RateExperimentConfig config;
    config.problem = pf.spec();
    config.filter = filter_by_name(filter_name_arg, landweber_step);
    config.smoothness_mu = mu;
    config.source_radius_rho = rho;
    config.constant_d = constant_d;
    config.delta_grid = deltas.empty() ? default_delta_grid() : parse_delta_list(deltas);
    config.trials_per_delta = trials;
    config.network_path = network;
    config.projector_mode =
        mode == "approximate" ? ProjectorMode::Approximate : ProjectorMode::Exact;
    config.q_filter = filter_by_name(q_filter, landweber_step);
    config.phi_exponent = phi_exponent;
    config.slope_tolerance = slope_tol;
    config.seed = seed;

    auto op = pf.build();
    NullSpaceNetwork phi = load_or_zero_network(network, op);
    const RateReport report = run_rate_experiment(config, *op, phi);

    ensure_dir(out_dir);
    write_rate_csv(report, join(out_dir, "rates.csv"));
    write_rate_svg(report, join(out_dir, "rates.svg"));
    std::ofstream(join(out_dir, "rates.json")) << rate_report_json(report) << '\n';
    std::cout << "fitted slope " << report.fitted_slope << " (expected "
              << report.expected_slope << " +- " << report.slope_tolerance << ") -> "
              << (report.pass ? "pass" : "fail") << '\n';
    return report.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"null-space network regularization for rank-deficient inverse problems"};
    app.require_subcommand(1);

    nlohmann::json cfg = nlohmann::json::object();
    const std::string cfg_path = prescan_config(argc, argv);
    if (!cfg_path.empty()) cfg = nlohmann::json::parse(json_text(cfg_path));
    std::string config_opt;

    // ---- rates ----------------------------------------------------------
    auto* rates = app.add_subcommand("rates", "convergence-rate experiment with slope fit");
    rates->add_option("--config", config_opt, "JSON config file (flags override its fields)");
    ProblemFlags rates_pf;
    rates_pf.load(cfg);
    rates_pf.attach(rates);
    std::string rates_filter = cfg.value("filter", std::string("tsvd"));
    double landweber_step = cfg.value("landweber_step", 1.0);
    double mu = cfg.value("smoothness_mu", 0.5);
    double rho = cfg.value("source_radius_rho", 1.0);
    double constant_d = cfg.value("constant_d", 1.0);
    std::string deltas;
    if (cfg.contains("delta_grid")) {
        std::ostringstream ss;
        for (double d : cfg.at("delta_grid").get<std::vector<double>>()) {
            if (ss.tellp() > 0) ss << ',';
            ss << d;
        }
        deltas = ss.str();
    }
    int trials = cfg.value("trials_per_delta", 20);
    std::string network = cfg.value("network_path", std::string{});
    std::string mode = cfg.value("projector_mode", std::string("exact"));
    std::string q_filter = cfg.value("q_filter", std::string("tikhonov"));
    double phi_exponent = cfg.value("phi_exponent", 2.0);
    double slope_tol = cfg.value("slope_tolerance", 0.1);
    std::uint64_t seed = cfg.value("seed", std::uint64_t{0});
    std::string out_dir = cfg.value("out_dir", std::string("."));
    rates->add_option("--filter", rates_filter, "filter: tikhonov|tsvd|landweber");
    rates->add_option("--landweber-step", landweber_step, "Landweber step tau");
    rates->add_option("--mu", mu, "smoothness order of the source condition");
    rates->add_option("--rho", rho, "source radius");
    rates->add_option("--constant-d", constant_d, "parameter-choice constant d");
    rates->add_option("--deltas", deltas, "comma-separated decreasing noise levels");
    rates->add_option("--trials", trials, "noise trials per delta");
    rates->add_option("--network", network, "serialized network JSON (empty: zero network)");
    rates->add_option("--mode", mode, "projector mode: exact|approximate");
    rates->add_option("--q-filter", q_filter, "filter for the approximate projector Q");
    rates->add_option("--phi-exponent", phi_exponent, "phi(alpha) = alpha^exponent for Q");
    rates->add_option("--slope-tol", slope_tol, "absolute slope tolerance");
    rates->add_option("--seed", seed, "experiment seed");
    rates->add_option("--out-dir", out_dir, "report output directory");

    // ---- converge -------------------------------------------------------
    auto* conv = app.add_subcommand("converge", "worst-case convergence toward A^M y");
    conv->add_option("--config", config_opt, "JSON config file (flags override its fields)");
    ProblemFlags conv_pf;
    conv_pf.load(cfg);
    conv_pf.attach(conv);
    std::string conv_filter = cfg.value("filter", std::string("tikhonov"));
    double conv_lw_step = cfg.value("landweber_step", 1.0);
    double conv_mu = cfg.value("smoothness_mu", 0.5);
    double conv_rho = cfg.value("source_radius_rho", 1.0);
    double conv_d = cfg.value("constant_d", 1.0);
    std::string conv_deltas = "1e-1,1e-2,1e-3,1e-4,1e-5";
    int conv_trials = cfg.value("trials_per_delta", 20);
    std::string conv_network = cfg.value("network_path", std::string{});
    std::uint64_t conv_seed = cfg.value("seed", std::uint64_t{0});
    std::string conv_out = cfg.value("out_dir", std::string("."));
    conv->add_option("--filter", conv_filter, "filter: tikhonov|tsvd|landweber");
    conv->add_option("--landweber-step", conv_lw_step, "Landweber step tau");
    conv->add_option("--mu", conv_mu, "smoothness mu of the parameter choice");
    conv->add_option("--rho", conv_rho, "source radius");
    conv->add_option("--constant-d", conv_d, "parameter-choice constant d");
    conv->add_option("--deltas", conv_deltas, "comma-separated decreasing noise levels");
    conv->add_option("--trials", conv_trials, "noise trials per delta");
    conv->add_option("--network", conv_network, "serialized network JSON");
    conv->add_option("--seed", conv_seed, "experiment seed");
    conv->add_option("--out-dir", conv_out, "report output directory");

    // ---- consistency ----------------------------------------------------
    auto* cons = app.add_subcommand("consistency", "data-consistency check A Phi x = A x");
    cons->add_option("--config", config_opt, "JSON config file (flags override its fields)");
    ProblemFlags cons_pf;
    cons_pf.load(cfg);
    cons_pf.attach(cons);
    std::string cons_network = cfg.value("network_path", std::string{});
    int cons_samples = cfg.value("samples", 1000);
    std::uint64_t cons_seed = cfg.value("seed", std::uint64_t{0});
    std::string cons_mode = cfg.value("projector_mode", std::string("exact"));
    std::string cons_q_filter = cfg.value("q_filter", std::string("tikhonov"));
    double cons_phi_alpha = cfg.value("phi_alpha", 1e-2);
    std::string cons_out = cfg.value("out_dir", std::string("."));
    cons->add_option("--network", cons_network, "serialized network JSON (empty: zero network)");
    cons->add_option("--samples", cons_samples, "number of random inputs");
    cons->add_option("--seed", cons_seed, "sampling seed");
    cons->add_option("--mode", cons_mode, "projector mode: exact|approximate");
    cons->add_option("--q-filter", cons_q_filter, "filter for the approximate projector");
    cons->add_option("--phi-alpha", cons_phi_alpha, "phi(alpha) of the approximate projector");
    cons->add_option("--out-dir", cons_out, "report output directory");

    // ---- verify-filters -------------------------------------------------
    auto* vf = app.add_subcommand("verify-filters",
                                  "filter axiom and rate-condition reports (JSON to stdout)");
    vf->add_option("--config", config_opt, "JSON config file (flags override its fields)");
    std::string vf_filter = cfg.value("filter", std::string("tikhonov"));
    double vf_mu = cfg.value("smoothness_mu", 1.0);
    double vf_lambda_max = cfg.value("lambda_max", 1.0);
    double vf_lw_step = cfg.value("landweber_step", 1.0);
    vf->add_option("--filter", vf_filter, "filter: tikhonov|tsvd|landweber")->required();
    vf->add_option("--mu", vf_mu, "smoothness order for the rate conditions");
    vf->add_option("--lambda-max", vf_lambda_max, "spectral upper bound lambda_max");
    vf->add_option("--landweber-step", vf_lw_step, "Landweber step tau");

    // ---- train ----------------------------------------------------------
    auto* tr = app.add_subcommand("train", "train a null-space network on phantoms");
    tr->add_option("--config", config_opt, "JSON config file (flags override its fields)");
    std::string tr_problem = cfg.contains("problem") ? cfg.at("problem").dump() : "";
    ProblemFlags tr_pf;
    tr_pf.load(cfg);
    tr_pf.attach(tr);
    int tr_epochs = cfg.value("epochs", 500);
    double tr_lr = cfg.value("learning_rate", 0.1);
    double tr_reg = cfg.value("reg_weight", 0.0);
    std::uint64_t tr_seed = cfg.value("seed", std::uint64_t{0});
    std::string tr_mode = cfg.value("mode", std::string("exact"));
    std::string tr_filter = cfg.value("filter", std::string("tsvd"));
    int tr_phantoms = cfg.value("phantoms", 20);
    double tr_amplitude = cfg.value("phantom_amplitude", 1.0);
    std::string tr_out = cfg.value("out", std::string("net.json"));
    std::string tr_out_dir = cfg.value("out_dir", std::string("."));
    tr->add_option("--problem", tr_problem, "problem spec as JSON (inline or file)");
    tr->add_option("--epochs", tr_epochs, "gradient-descent epochs");
    tr->add_option("--lr", tr_lr, "learning rate");
    tr->add_option("--reg-weight", tr_reg, "weight of the layer-norm product penalty");
    tr->add_option("--seed", tr_seed, "init and phantom seed");
    tr->add_option("--mode", tr_mode, "exact | regularized:<alpha>");
    tr->add_option("--filter", tr_filter, "filter for regularized mode");
    tr->add_option("--phantoms", tr_phantoms, "number of training phantoms");
    tr->add_option("--phantom-amplitude", tr_amplitude, "phantom value range");
    tr->add_option("--out", tr_out, "output network JSON path");
    tr->add_option("--out-dir", tr_out_dir, "loss history output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (rates->parsed()) {
            return cmd_rates(cfg, rates, rates_pf, rates_filter, landweber_step, mu, rho,
                             constant_d, deltas, trials, network, mode, q_filter, phi_exponent,
                             slope_tol, seed, out_dir);
        }

        if (conv->parsed()) {
            auto op = conv_pf.build();
            NullSpaceNetwork phi = load_or_zero_network(conv_network, op);
            const ParamChoice choice{conv_mu, conv_rho, conv_d};
            const ConvergenceReport report = run_convergence_experiment(
                *op, filter_by_name(conv_filter, conv_lw_step), phi,
                parse_delta_list(conv_deltas), conv_trials, choice, conv_seed);
            ensure_dir(conv_out);
            write_convergence_csv(report, join(conv_out, "convergence.csv"));
            std::ofstream(join(conv_out, "convergence.json"))
                << convergence_report_json(report) << '\n';
            std::cout << "sup error " << report.initial_sup << " -> " << report.final_sup
                      << (report.pass ? " pass" : " fail") << '\n';
            return report.pass ? 0 : 1;
        }

        if (cons->parsed()) {
            auto op = cons_pf.build();
            NullSpaceNetwork phi = load_or_zero_network(cons_network, op);
            if (cons_mode.rfind("approximate", 0) == 0) {
                phi = NullSpaceNetwork(phi.base(), op,
                                       filter_by_name(cons_q_filter, 1.0), cons_phi_alpha);
            }
            const ConsistencyReport report =
                run_consistency_check(*op, phi, cons_samples, cons_seed);
            ensure_dir(cons_out);
            std::ofstream(join(cons_out, "consistency.json"))
                << consistency_report_json(report) << '\n';
            std::cout << consistency_report_json(report) << '\n';
            return report.pass ? 0 : 1;
        }

        if (vf->parsed()) {
            const FilterSpec spec = filter_by_name(vf_filter, vf_lw_step);
            const AxiomReport axioms =
                verify_filter_axioms(spec, vf_lambda_max, default_alpha_grid(),
                                     default_axiom_lambda_grid(vf_lambda_max));
            const RateConditionReport rates_report =
                verify_rate_conditions(spec, vf_mu, vf_lambda_max, default_alpha_grid(),
                                       default_rate_lambda_grid(vf_lambda_max));
            nlohmann::json out;
            out["filter"] = vf_filter;
            out["axioms"] = nlohmann::json::parse(axiom_report_json(axioms));
            out["rate_conditions"] =
                nlohmann::json::parse(rate_condition_report_json(rates_report));
            out["pass"] = axioms.pass && rates_report.pass;
            std::cout << out.dump(2) << '\n';
            return (axioms.pass && rates_report.pass) ? 0 : 1;
        }

        if (tr->parsed()) {
            std::shared_ptr<const DenseOperator> op;
            if (!tr_problem.empty() && tr_pf.operator_csv.empty()) {
                op = std::make_shared<const DenseOperator>(
                    make_problem(problem_from_json(json_text(tr_problem))));
            } else {
                op = tr_pf.build();
            }
            TrainConfig config;
            config.learning_rate = tr_lr;
            config.epochs = tr_epochs;
            config.reg_weight = tr_reg;
            config.seed = tr_seed;
            if (tr_mode == "exact") {
                config.mode = TrainMode::ExactProjector;
            } else if (tr_mode.rfind("regularized:", 0) == 0) {
                config.mode = TrainMode::Regularized;
                config.alpha = std::stod(tr_mode.substr(12));
                config.filter = filter_by_name(tr_filter, 1.0);
            } else {
                throw CLI::ValidationError("--mode", "expected exact or regularized:<alpha>");
            }
            const TrainingSet set =
                make_piecewise_phantoms(op->cols(), tr_phantoms, tr_seed, tr_amplitude);
            TrainResult result =
                train(make_default_network(op->cols(), tr_seed), *op, set, config);

            ensure_dir(tr_out_dir);
            if (tr_out.empty()) tr_out = "net.json";
            save_network_json(result.net, tr_seed, operator_hash_hex(*op),
                              tr_out.front() == '/' ? tr_out : join(tr_out_dir, tr_out));
            std::ofstream hist(join(tr_out_dir, "loss_history.csv"));
            hist << "epoch,data_term,reg_term,total\n";
            hist.precision(17);
            for (std::size_t e = 0; e < result.history.size(); ++e)
                hist << e << ',' << result.history[e].data_term << ','
                     << result.history[e].reg_term << ',' << result.history[e].total << '\n';
            std::cout << "final loss " << result.history.back().total << " (data "
                      << result.history.back().data_term << ")\n";
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 2;
    }
    return 0;
}
