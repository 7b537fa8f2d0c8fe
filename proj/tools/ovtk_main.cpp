#include <cstddef>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "ovtk/certify.hpp"
#include "ovtk/config.hpp"
#include "ovtk/errors.hpp"
#include "ovtk/fmt.hpp"
#include "ovtk/parallel.hpp"
#include "ovtk/report_io.hpp"
#include "ovtk/scenarios.hpp"
#include "ovtk/simulate.hpp"

namespace {

using namespace ovtk;

/// Everything a subcommand needs, assembled from the validated config.
struct Pipeline {
    RunConfig cfg;
    TimeGrid grid;
    ScenarioBundle bundle;
    std::vector<ControlPolicy> challengers;
    std::vector<std::string> warnings;
};

ControlPolicy parse_policy(const std::string& token, const ScenarioBundle& bundle) {
    if (token == "builtin") return bundle.candidate;
    if (token == "sin")
        return ControlPolicy::deterministic([](double t) { return std::sin(t); }, "sin");
    const auto piece = [&token](std::size_t from, std::size_t to) {
        return token.substr(from, to == std::string::npos ? to : to - from);
    };
    const auto parse_num = [&token](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw InputError("control spec '" + token + "': malformed number '" + s + "'");
        }
    };
    if (token.rfind("const:", 0) == 0) return ControlPolicy::constant(parse_num(piece(6, std::string::npos)));
    if (token.rfind("needle:", 0) == 0) {
        const auto a = token.find(':', 7);
        const auto b = a == std::string::npos ? a : token.find(':', a + 1);
        if (a == std::string::npos || b == std::string::npos)
            throw InputError("control spec '" + token + "': expected needle:<t0>:<width>:<height>");
        return needle_challenger(bundle.candidate, parse_num(piece(7, a)),
                                 parse_num(piece(a + 1, b)),
                                 parse_num(piece(b + 1, std::string::npos)));
    }
    throw InputError("unknown control spec '" + token +
                     "' (expected builtin, const:<v>, sin, or needle:<t0>:<width>:<height>)");
}

Pipeline build_pipeline(RunConfig cfg) {
    validate_config(cfg);
    Pipeline p;
    const double t_end = cfg.t_end();
    p.grid = TimeGrid(t_end, static_cast<std::size_t>(std::llround(t_end / cfg.dt)));
    if (cfg.scenario == "example1") {
        p.bundle = build_example1(cfg.ex1);
    } else {
        auto built = build_example2(cfg.ex2, p.grid, cfg.seed);
        p.bundle = std::move(built.bundle);
        p.warnings = std::move(built.warnings);
    }
    if (cfg.candidate != "builtin") p.bundle.candidate = parse_policy(cfg.candidate, p.bundle);
    if (cfg.challengers.empty()) {
        p.challengers = p.bundle.default_challengers;
    } else {
        for (const auto& tok : cfg.challengers)
            p.challengers.push_back(parse_policy(tok, p.bundle));
    }
    for (auto& needle :
         default_needles(p.bundle.candidate, p.bundle.model.control_set, cfg.horizons.front(),
                         cfg.needle_count, cfg.needle_height_scale, cfg.needle_width))
        p.challengers.push_back(std::move(needle));
    p.cfg = std::move(cfg);
    return p;
}

CertifyOptions make_options(const Pipeline& p) {
    CertifyOptions o;
    o.adjoint.method = p.cfg.solver;
    o.adjoint.basis.degree = p.cfg.basis_degree;
    o.adjoint.n_threads = resolve_threads(p.cfg.threads);
    o.simulate.blowup_guard = p.cfg.blowup_guard;
    o.simulate.n_threads = resolve_threads(p.cfg.threads);
    o.validate.budget = p.cfg.validation_budget;
    o.validate.t_max = p.cfg.t_end();
    o.concavity.budget = p.cfg.validation_budget;
    o.concavity.t_max = p.cfg.t_end();
    o.tol_zero = p.cfg.tol_zero;
    o.decay_ratio_max = p.cfg.decay_ratio_max;
    return o;
}

MeanCI vector_ci(const Eigen::VectorXd& v) {
    return mean_ci(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

void print_warnings(const Pipeline& p) {
    for (const auto& w : p.warnings) std::cerr << "warning: " << w << "\n";
}

void write_sidecar(const std::string& dir, const std::string& name, const std::string& body,
                   const RunConfig& cfg) {
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
    if (!out) throw InputError("cannot write '" + name + "' in '" + dir + "'");
    out << "artifact_version = " << kArtifactVersion << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << body;
    out << "# effective configuration\n" << render_config(cfg);
}

int run_validate(const Pipeline& p) {
    const CertifyOptions o = make_options(p);
    print_warnings(p);
    const auto validation = validate_model(p.bundle.model, o.validate);
    std::cout << validation.summary();
    const auto concavity = check_concavity(p.bundle.model, o.concavity);
    std::cout << concavity.summary();
    if (!validation.pass) {
        std::cerr << "model '" << p.bundle.model.name << "' failed validation\n";
        return 2;
    }
    return 0;
}

int run_simulate(const Pipeline& p) {
    const CertifyOptions o = make_options(p);
    print_warnings(p);
    const auto lattice = make_lattice(p.grid, p.cfg.n_paths, p.cfg.seed, o.simulate.n_threads);
    const auto sim = simulate_forward(p.bundle.model, p.bundle.candidate, lattice, o.simulate);
    std::filesystem::create_directories(p.cfg.out_dir);
    const auto base = std::filesystem::path(p.cfg.out_dir);
    write_ensemble_csv(sim.x, (base / "paths_x.csv").string());
    write_ensemble_binary(sim.x, (base / "paths_x.bin").string());
    write_ensemble_csv(sim.u, (base / "paths_u.csv").string());
    write_ensemble_binary(sim.u, (base / "paths_u.bin").string());
    for (std::size_t j = 0; j < sim.exo.size(); ++j) {
        const std::string name = "paths_" + p.bundle.model.exogenous[j].name;
        write_ensemble_csv(sim.exo[j], (base / (name + ".csv")).string());
        write_ensemble_binary(sim.exo[j], (base / (name + ".bin")).string());
    }
    std::string body = "model = " + p.bundle.model.name + "\n";
    body += "candidate = " + p.bundle.candidate.label() + "\n";
    body += "clamp_events = " + std::to_string(sim.clamp_count) + "\n";
    write_sidecar(p.cfg.out_dir, "simulate_metadata.txt", body, p.cfg);
    for (double T : p.cfg.horizons) {
        const auto ci = vector_ci(reward_sums(p.bundle.model, sim, p.grid.require_node(T),
                                              o.simulate.n_threads));
        std::cout << "J(T=" << format_double(T) << ") = " << format_double(ci.mean) << " +- "
                  << format_double(ci.ci95) << "\n";
    }
    std::cout << "wrote path ensembles to " << p.cfg.out_dir << "\n";
    return 0;
}

int run_adjoint(const Pipeline& p) {
    const CertifyOptions o = make_options(p);
    print_warnings(p);
    const auto lattice = make_lattice(p.grid, p.cfg.n_paths, p.cfg.seed, o.simulate.n_threads);
    const auto sim = simulate_forward(p.bundle.model, p.bundle.candidate, lattice, o.simulate);
    auto sol = solve_adjoint(p.bundle.model, sim, lattice, p.cfg.t_end(), o.adjoint);
    adjoint_diagnostics(p.bundle.model, sim, lattice, sol, o.adjoint.n_threads);
    std::filesystem::create_directories(p.cfg.out_dir);
    const auto base = std::filesystem::path(p.cfg.out_dir);
    write_ensemble_csv(sol.p, (base / "costate_p.csv").string());
    write_ensemble_binary(sol.p, (base / "costate_p.bin").string());
    write_ensemble_csv(sol.h, (base / "costate_h.csv").string());
    write_ensemble_binary(sol.h, (base / "costate_h.bin").string());
    write_ensemble_csv(sol.p_pair, (base / "costate_p_pair.csv").string());
    write_ensemble_binary(sol.p_pair, (base / "costate_p_pair.bin").string());
    const auto p0 = vector_ci(Eigen::VectorXd(sol.p.values.col(0)));
    std::string body = "model = " + p.bundle.model.name + "\n";
    body += "horizon = " + format_double(sol.horizon) + "\n";
    body += "solver = " + to_string(sol.solver) + "\n";
    body += "basis_degree = " + std::to_string(sol.basis.degree) + "\n";
    body += "degree_reductions = " + std::to_string(sol.diag.degree_reductions) + "\n";
    body += "p0_mean = " + format_double(p0.mean) + "\n";
    body += "max_abs_z = " + format_double(sol.diag.max_abs_z) + "\n";
    body += "frac_z_above_3 = " + format_double(sol.diag.frac_z_above_3) + "\n";
    write_sidecar(p.cfg.out_dir, "adjoint_metadata.txt", body, p.cfg);
    std::cout << "solver: " << to_string(sol.solver) << "\n";
    std::cout << "p0 = " << format_double(p0.mean) << " +- " << format_double(p0.ci95) << "\n";
    std::cout << "residual max |z| = " << format_double(sol.diag.max_abs_z) << "\n";
    std::cout << "wrote costate ensembles to " << p.cfg.out_dir << "\n";
    return 0;
}

int run_certify(const Pipeline& p, bool with_gaps) {
    CertifyOptions o = make_options(p);
    o.run_gap = with_gaps;
    print_warnings(p);
    const auto lattice = make_lattice(p.grid, p.cfg.n_paths, p.cfg.seed, o.simulate.n_threads);
    HorizonSweep sweep(p.cfg.horizons, p.grid);
    const auto report =
        run_certification(p.bundle.model, p.bundle.candidate, p.challengers, lattice, sweep, o);
    write_report(report, p.cfg, p.cfg.out_dir);
    std::cout << render_summary_from_dir(p.cfg.out_dir);
    return report.verdict == Verdict::kRefuted ? 3 : 0;
}

int run_report(const std::string& dir) {
    const std::string text = render_summary_from_dir(dir);
    std::ofstream out(std::filesystem::path(dir) / "summary.txt", std::ios::binary);
    if (!out) throw InputError("cannot rewrite summary.txt in '" + dir + "'");
    out << text;
    std::cout << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo certifier of overtaking optimality for scalar controlled diffusions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kArtifactVersion));

    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::vector<std::string> challenger_flags;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file (key = value lines)");
        cmd->add_option_function<std::vector<std::string>>(
            "--set",
            [&overrides](const std::vector<std::string>& kvs) {
                for (const auto& kv : kvs) {
                    const auto eq = kv.find('=');
                    if (eq == std::string::npos)
                        throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
                    overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
                }
            },
            "override a config key (key=value, repeatable)");
        const auto key_flag = [&](const std::string& flag, const std::string& key,
                                  const std::string& desc) {
            cmd->add_option_function<std::string>(
                flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); },
                desc);
        };
        key_flag("--scenario", "scenario", "example1 | example2");
        key_flag("--seed", "seed", "root seed of the draw stream");
        key_flag("--paths", "n_paths", "Monte Carlo path count");
        key_flag("--dt", "dt", "time step");
        key_flag("--horizons", "horizons", "comma-separated sweep horizons");
        key_flag("--degree", "basis_degree", "regression basis degree");
        key_flag("--solver", "solver", "auto | lsmc | explicit");
        key_flag("--threads", "threads", "worker count (0 = hardware)");
        key_flag("--candidate", "candidate", "builtin | const:<v> | sin");
        key_flag("--out", "out_dir", "output directory");
        key_flag("--needles", "needle_count", "auto-generated needle challengers");
        cmd->add_option("--challenger", challenger_flags,
                        "challenger spec (repeatable; replaces the builtin set)");
    };

    auto* cmd_validate = app.add_subcommand("validate", "check declared partials and concavity");
    auto* cmd_simulate = app.add_subcommand("simulate", "simulate the candidate, write ensembles");
    auto* cmd_adjoint = app.add_subcommand("adjoint", "solve the costate, write ensembles");
    auto* cmd_certify = app.add_subcommand("certify", "full certification pipeline");
    auto* cmd_sweep = app.add_subcommand("sweep", "certificate series only (no value gaps)");
    auto* cmd_report = app.add_subcommand("report", "re-render summary.txt from saved results");
    for (auto* cmd : {cmd_validate, cmd_simulate, cmd_adjoint, cmd_certify, cmd_sweep})
        add_common(cmd);
    std::string report_dir = "ovtk-out";
    cmd_report->add_option("--dir,--out", report_dir, "directory holding a written report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (cmd_report->parsed()) return run_report(report_dir);
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        for (const auto& [key, value] : overrides) apply_override(cfg, key, value);
        if (!challenger_flags.empty()) cfg.challengers = challenger_flags;
        const Pipeline pipeline = build_pipeline(std::move(cfg));
        if (cmd_validate->parsed()) return run_validate(pipeline);
        if (cmd_simulate->parsed()) return run_simulate(pipeline);
        if (cmd_adjoint->parsed()) return run_adjoint(pipeline);
        if (cmd_certify->parsed()) return run_certify(pipeline, true);
        if (cmd_sweep->parsed()) return run_certify(pipeline, false);
        std::cerr << "no subcommand selected\n";
        return 1;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
