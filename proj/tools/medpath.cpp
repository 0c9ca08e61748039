// medpath: high-dimensional mediation solver CLI
//
// Subcommands: simulate, screen, fit, grid-search, evaluate, replicate,
// report. Every command is a pure function of (input files, flags, seed)
// and writes one manifest.json per output directory.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "medpath/core_model.hpp"
#include "medpath/io.hpp"
#include "medpath/metrics.hpp"
#include "medpath/parallel.hpp"
#include "medpath/screening.hpp"
#include "medpath/selection.hpp"
#include "medpath/simgen.hpp"
#include "medpath/solver.hpp"
#include "medpath/study.hpp"
#include "medpath/types.hpp"

namespace fs = std::filesystem;
using namespace medpath;

#ifndef MEDPATH_VERSION
#define MEDPATH_VERSION "0.0.0"
#endif

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void write_manifest(const fs::path& out_dir, const std::string& command, const Json& config,
                    std::uint64_t seed, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, double wall_time_sec) {
    Json manifest{{"command", command},
                  {"version", MEDPATH_VERSION},
                  {"seed", seed},
                  {"config", config},
                  {"inputs", inputs},
                  {"outputs", outputs},
                  {"wall_time_sec", wall_time_sec}};
    write_json_file(manifest, out_dir / "manifest.json");
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int replicates,
                 std::optional<std::uint64_t> seed_override) {
    Timer timer;
    Scenario sc = scenario_from_json(read_json_file(config_path));
    if (seed_override) sc.seed = *seed_override;
    if (replicates < 1) throw ContractError("--replicates must be >= 1");

    const fs::path dir(out_dir);
    std::vector<std::string> outputs;
    for (int r = 0; r < replicates; ++r) {
        Scenario rep = sc;
        rep.seed = sc.seed + static_cast<std::uint64_t>(r);
        const auto [data, truth] = generate(rep);
        char suffix[16];
        std::snprintf(suffix, sizeof(suffix), "%03d", r);
        const fs::path data_path = dir / ("dataset_" + std::string(suffix) + ".csv");
        const fs::path truth_path = dir / ("truth_" + std::string(suffix) + ".json");
        write_dataset_csv(data, data_path);
        write_json_file(to_json(truth), truth_path);
        outputs.push_back(data_path.string());
        outputs.push_back(truth_path.string());
    }
    Json config = to_json(sc);
    config["replicates"] = replicates;
    write_manifest(dir, "simulate", config, sc.seed, {config_path}, outputs, timer.seconds());
    return 0;
}

int cmd_screen(const std::string& data_path, const std::string& out_dir,
               std::optional<double> k, std::optional<Index> d) {
    Timer timer;
    if (!k && !d) throw ContractError("screen: provide --k or --d");
    if (k && d) throw ContractError("screen: --k and --d are mutually exclusive");
    const Dataset data = read_dataset_csv(data_path);
    ScreenConfig cfg;
    if (k) cfg.k = *k;
    if (d) cfg.d_override = *d;
    const ScreenResult res = sis_screen(data, cfg, 1);

    const fs::path dir(out_dir);
    write_dataset_csv(res.screened, dir / "screened.csv");
    write_json_file(to_json(res), dir / "screen.json");
    Json config{{"k", k ? Json(*k) : Json(nullptr)}, {"d", d ? Json(*d) : Json(nullptr)}};
    write_manifest(dir, "screen", config, 0, {data_path},
                   {(dir / "screened.csv").string(), (dir / "screen.json").string()},
                   timer.seconds());
    std::cout << "kept " << res.kept_indices.size() << " of " << data.p() << " mediators\n";
    return 0;
}

SolverConfig load_solver(const std::string& solver_path) {
    if (solver_path.empty()) return SolverConfig{};
    return solver_config_from_json(read_json_file(solver_path));
}

int cmd_fit(const std::string& data_path, const std::string& config_path,
            const std::string& solver_path, const std::string& out_dir,
            const std::string& strategy_flag, std::optional<double> floor_flag) {
    Timer timer;
    const Dataset data = read_dataset_csv(data_path);
    Json pen_json = read_json_file(config_path);
    if (!strategy_flag.empty()) pen_json["strategy"] = strategy_flag;
    if (floor_flag) pen_json["gamma_floor"] = *floor_flag;
    const PenaltyConfig pen = penalty_config_from_json(pen_json);
    const SolverConfig cfg = load_solver(solver_path);

    const FitResult res = fit(data, pen, cfg);
    if (!res.converged)
        std::cerr << "warning: solver did not converge within " << cfg.max_iter
                  << " iterations\n";

    const fs::path dir(out_dir);
    write_json_file(to_json(res), dir / "fit.json");
    Json config{{"penalty", to_json(pen)}, {"solver", to_json(cfg)}};
    write_manifest(dir, "fit", config, cfg.seed, {data_path, config_path},
                   {(dir / "fit.json").string()}, timer.seconds());
    return 0;
}

std::string grid_table_csv(const GridSearchResult& res) {
    std::string out =
        "lambda_alpha,lambda_beta,lambda_gamma,requested_lambda_gamma,bic,q,objective,"
        "converged,iterations,failed\n";
    for (const auto& pt : res.table) {
        out += format_double(pt.config.lambda_alpha) + "," +
               format_double(pt.config.lambda_beta) + "," +
               format_double(pt.config.lambda_gamma) + "," +
               format_double(pt.requested_lambda_gamma) + ",";
        if (pt.result.failed())
            out += ",,,,," + std::string("1\n");
        else
            out += format_double(pt.result.bic) + "," + std::to_string(pt.result.q) + "," +
                   format_double(pt.result.objective) + "," +
                   (pt.result.converged ? "1" : "0") + "," +
                   std::to_string(pt.result.iterations) + ",0\n";
    }
    return out;
}

int cmd_grid_search(const std::string& data_path, const std::string& config_path,
                    const std::string& out_dir, int jobs, const std::string& strategy_flag,
                    std::optional<double> floor_flag) {
    Timer timer;
    const Dataset data = read_dataset_csv(data_path);
    const Json config = read_json_file(config_path);

    GridSpec grid = config.contains("grid") ? grid_spec_from_json(config["grid"]) : GridSpec{};
    if (!strategy_flag.empty()) grid.strategy = gamma_strategy_from_string(strategy_flag);
    if (floor_flag) grid.gamma_floor = *floor_flag;

    PenaltyConfig base;
    base.variant = penalty_variant_from_string(config.value("variant", std::string("lasso")));
    base.kappa = config.value("kappa", 0.0);
    base.nu = config.value("nu", 2.0);
    const SolverConfig cfg = config.contains("solver")
                                 ? solver_config_from_json(config["solver"])
                                 : SolverConfig{};

    const GridSearchResult res = grid_search(data, grid, base, cfg, jobs);

    const fs::path dir(out_dir);
    atomic_write_text(dir / "table.csv", grid_table_csv(res));
    const GridPoint& best = res.table[res.best];
    Json best_json{{"index", res.best},
                   {"config", to_json(best.config)},
                   {"requested_lambda_gamma", best.requested_lambda_gamma},
                   {"fit", to_json(best.result)},
                   {"ties", res.ties}};
    write_json_file(best_json, dir / "best.json");

    Json manifest_config{{"grid", to_json(grid)},
                         {"variant", to_string(base.variant)},
                         {"kappa", base.kappa},
                         {"nu", base.nu},
                         {"solver", to_json(cfg)}};
    write_manifest(dir, "grid-search", manifest_config, cfg.seed, {data_path, config_path},
                   {(dir / "table.csv").string(), (dir / "best.json").string()},
                   timer.seconds());
    std::cout << "best: lambda_alpha=" << best.config.lambda_alpha
              << " lambda_beta=" << best.config.lambda_beta
              << " lambda_gamma=" << best.config.lambda_gamma << " bic=" << best.result.bic
              << "\n";
    return 0;
}

int cmd_evaluate(const std::string& fit_path, const std::string& truth_path,
                 const std::string& screen_path, const std::string& out_dir) {
    Timer timer;
    const FitResult fitted = fit_result_from_json(read_json_file(fit_path));
    const Truth truth = truth_from_json(read_json_file(truth_path));

    MediationParams est = fitted.params;
    if (est.p() != truth.params.p()) {
        if (screen_path.empty())
            throw ContractError("evaluate: fit has " + std::to_string(est.p()) +
                                " mediators but truth has " +
                                std::to_string(truth.params.p()) +
                                "; pass --screen to map screened fits back");
        const Json sj = read_json_file(screen_path);
        if (!sj.contains("kept_indices"))
            throw ContractError("evaluate: screen JSON lacks kept_indices");
        const auto kept = sj["kept_indices"].get<std::vector<Index>>();
        if (static_cast<Index>(kept.size()) != est.p())
            throw ContractError("evaluate: kept_indices length does not match fit dimension");
        MediationParams full = MediationParams::zero(truth.params.p());
        full.gamma = est.gamma;
        for (std::size_t j = 0; j < kept.size(); ++j) {
            full.alpha[kept[j] - 1] = est.alpha[static_cast<Index>(j)];
            full.beta[kept[j] - 1] = est.beta[static_cast<Index>(j)];
        }
        est = std::move(full);
    }

    const MetricsReport report = evaluate_against_truth(est, truth.params, 1e-8);
    const fs::path dir(out_dir);
    write_json_file(to_json(report), dir / "metrics.json");
    write_manifest(dir, "evaluate", Json::object(), 0, {fit_path, truth_path},
                   {(dir / "metrics.json").string()}, timer.seconds());
    return 0;
}

int cmd_replicate(const std::string& config_path, const std::string& out_dir, int jobs,
                  std::optional<int> replicates_override,
                  std::optional<std::uint64_t> seed_override) {
    Timer timer;
    StudyConfig cfg = study_config_from_json(read_json_file(config_path));
    if (replicates_override) cfg.replicates = *replicates_override;
    if (seed_override) cfg.seed = *seed_override;
    cfg.validate();

    const StudyResult result = run_study(cfg, jobs);

    const fs::path dir(out_dir);
    atomic_write_text(dir / "aggregate.csv", aggregate_csv(result));
    atomic_write_text(dir / "long.csv", long_csv(result));

    std::vector<std::string> outputs{(dir / "aggregate.csv").string(),
                                     (dir / "long.csv").string()};
    int failures = 0;
    for (const auto& out : result.outcomes) {
        char rep[16];
        std::snprintf(rep, sizeof(rep), "r%03d", out.replicate);
        std::string name = out.method + "_p" + std::to_string(out.p);
        if (out.k > 0.0) name += "_k" + format_double(out.k);
        const fs::path cell_dir = dir / "replicates" / rep;
        Json j{{"method", out.method},
               {"p", out.p},
               {"k", out.k},
               {"replicate", out.replicate},
               {"error", out.error}};
        if (out.error.empty()) {
            j["chosen_config"] = to_json(out.chosen_config);
            j["requested_lambda_gamma"] = out.requested_lambda_gamma;
            j["fit"] = to_json(out.fit);
            j["metrics"] = to_json(out.metrics);
        } else {
            ++failures;
        }
        const fs::path cell_path = cell_dir / (name + ".json");
        write_json_file(j, cell_path);
        outputs.push_back(cell_path.string());
    }
    write_manifest(dir, "replicate", to_json(cfg), cfg.seed, {config_path}, outputs,
                   timer.seconds());

    if (failures > 0)
        std::cerr << "warning: " << failures << " of " << result.outcomes.size()
                  << " cells failed\n";
    std::cout << aggregate_csv(result);
    return failures == static_cast<int>(result.outcomes.size()) ? 4 : 0;
}

int cmd_report(const std::string& in_dir, const std::string& out_dir) {
    Timer timer;
    const fs::path long_path = fs::path(in_dir) / "long.csv";
    std::ifstream in(long_path);
    if (!in) throw IoError("cannot open " + long_path.string());

    std::string line;
    if (!std::getline(in, line) || line != "method,p,k,replicate,metric,value")
        throw ContractError("report: unexpected long.csv header in " + long_path.string());

    // key: method, p, k, metric -> running stats
    std::map<std::tuple<std::string, std::string, std::string, std::string>,
             std::vector<double>>
        groups;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string method, p, k, rep, metric, value;
        std::getline(ss, method, ',');
        std::getline(ss, p, ',');
        std::getline(ss, k, ',');
        std::getline(ss, rep, ',');
        std::getline(ss, metric, ',');
        std::getline(ss, value, ',');
        groups[{method, p, k, metric}].push_back(std::stod(value));
    }

    std::string out = "method,p,k,metric,mean,sd,n\n";
    for (const auto& [key, values] : groups) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        const double sd =
            values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
        out += std::get<0>(key) + "," + std::get<1>(key) + "," + std::get<2>(key) + "," +
               std::get<3>(key) + "," + format_double(mean) + "," + format_double(sd) + "," +
               std::to_string(values.size()) + "\n";
    }
    const fs::path dir(out_dir);
    atomic_write_text(dir / "summary.csv", out);
    write_manifest(dir, "report", Json::object(), 0, {long_path.string()},
                   {(dir / "summary.csv").string()}, timer.seconds());
    std::cout << out;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"medpath: sparse mediation-model solver and simulation harness"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(MEDPATH_VERSION));

    std::string config_path, data_path, out_dir, in_dir, solver_path, fit_path, truth_path,
        screen_path, strategy;
    int jobs = default_jobs();
    int replicates = 1;
    std::optional<int> replicates_opt;
    std::optional<std::uint64_t> seed_opt;
    std::optional<double> k_opt, floor_opt;
    std::optional<Index> d_opt;

    auto* sim = app.add_subcommand("simulate", "generate datasets from a scenario config");
    sim->add_option("--config", config_path, "scenario JSON")->required();
    sim->add_option("--out", out_dir, "output directory")->required();
    sim->add_option("--replicates", replicates, "number of replicate datasets");
    sim->add_option("--seed", seed_opt, "override the scenario seed");

    auto* scr = app.add_subcommand("screen", "sure-independence screening of mediators");
    scr->add_option("--data", data_path, "dataset CSV")->required();
    scr->add_option("--out", out_dir, "output directory")->required();
    scr->add_option("--k", k_opt, "scaling factor, d = k*n/ln(n)");
    scr->add_option("--d", d_opt, "explicit reduced dimension");

    auto* fitc = app.add_subcommand("fit", "fit one penalty configuration");
    fitc->add_option("--data", data_path, "dataset CSV")->required();
    fitc->add_option("--config", config_path, "penalty JSON")->required();
    fitc->add_option("--solver", solver_path, "solver JSON (defaults otherwise)");
    fitc->add_option("--out", out_dir, "output directory")->required();
    fitc->add_option("--strategy", strategy, "override strategy: TR|MD|SMD");
    fitc->add_option("--gamma-floor", floor_opt, "override the SMD floor c");

    auto* gs = app.add_subcommand("grid-search", "BIC selection over the penalty grid");
    gs->add_option("--data", data_path, "dataset CSV")->required();
    gs->add_option("--config", config_path, "grid JSON")->required();
    gs->add_option("--out", out_dir, "output directory")->required();
    gs->add_option("--jobs", jobs, "worker count (env MEDPATH_JOBS)");
    gs->add_option("--strategy", strategy, "override strategy: TR|MD|SMD");
    gs->add_option("--gamma-floor", floor_opt, "override the SMD floor c");

    auto* ev = app.add_subcommand("evaluate", "metrics of a fit against a truth file");
    ev->add_option("--fit", fit_path, "fit JSON")->required();
    ev->add_option("--truth", truth_path, "truth JSON")->required();
    ev->add_option("--screen", screen_path, "screen JSON for screened fits");
    ev->add_option("--out", out_dir, "output directory")->required();

    auto* rep = app.add_subcommand("replicate", "full replicate study");
    rep->add_option("--config", config_path, "study JSON")->required();
    rep->add_option("--out", out_dir, "output directory")->required();
    rep->add_option("--jobs", jobs, "worker count (env MEDPATH_JOBS)");
    rep->add_option("--replicates", replicates_opt, "override replicate count");
    rep->add_option("--seed", seed_opt, "override the study seed");

    auto* rpt = app.add_subcommand("report", "summarize a replicate run directory");
    rpt->add_option("--in", in_dir, "replicate output directory")->required();
    rpt->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(config_path, out_dir, replicates, seed_opt);
        if (scr->parsed()) return cmd_screen(data_path, out_dir, k_opt, d_opt);
        if (fitc->parsed())
            return cmd_fit(data_path, config_path, solver_path, out_dir, strategy, floor_opt);
        if (gs->parsed())
            return cmd_grid_search(data_path, config_path, out_dir, jobs, strategy, floor_opt);
        if (ev->parsed()) return cmd_evaluate(fit_path, truth_path, screen_path, out_dir);
        if (rep->parsed())
            return cmd_replicate(config_path, out_dir, jobs, replicates_opt, seed_opt);
        if (rpt->parsed()) return cmd_report(in_dir, out_dir);
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
    return 2;
}
