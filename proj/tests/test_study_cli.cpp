#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "medpath/io.hpp"
#include "medpath/study.hpp"
#include "test_support.hpp"

using namespace medpath;

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

StudyConfig smoke_study() {
    StudyConfig cfg;
    cfg.scenario.p = 40;
    cfg.scenario.n = 30;
    cfg.replicates = 3;
    cfg.grid.lambda_alpha_values = {0.1, 1.0};
    cfg.grid.lambda_beta_values = {0.1, 1.0};
    cfg.grid.lambda_gamma_values = {0.0, 0.5, 2.0};
    MethodSpec tr;
    tr.name = "TR_L";
    tr.strategy = GammaStrategy::TR;
    MethodSpec smd;
    smd.name = "SMD_L";
    smd.strategy = GammaStrategy::SMD;
    smd.gamma_floor = 0.3;
    cfg.methods = {tr, smd};
    cfg.seed = 5;
    return cfg;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(MEDPATH_BIN) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("run_study produces one outcome per cell with sane aggregates") {
    const StudyConfig cfg = smoke_study();
    const StudyResult res = run_study(cfg, 1);
    CHECK(res.outcomes.size() == 3 * 2);  // replicates x methods
    CHECK(res.aggregates.size() == 2);
    for (const auto& out : res.outcomes) {
        CHECK(out.error.empty());
        CHECK(out.fit.q >= 0);
        CHECK(out.metrics.tp + out.metrics.fp + out.metrics.tn + out.metrics.fn == 40);
    }
    for (const auto& agg : res.aggregates) {
        CHECK(agg.n_replicates == 3);
        CHECK(agg.mean_metrics.tpr >= 0.0);
        CHECK(agg.mean_metrics.tpr <= 1.0);
    }
}

TEST_CASE("run_study is deterministic and scheduling independent") {
    const StudyConfig cfg = smoke_study();
    const StudyResult serial = run_study(cfg, 1);
    const StudyResult parallel = run_study(cfg, 2);
    CHECK(long_csv(serial) == long_csv(parallel));
    CHECK(aggregate_csv(serial) == aggregate_csv(parallel));
}

TEST_CASE("run_study respects explicit pair lists and k sweeps") {
    StudyConfig cfg = smoke_study();
    cfg.methods.clear();
    MethodSpec m;
    m.name = "SMD_L_pair";
    m.strategy = GammaStrategy::SMD;
    m.gamma_floor = 0.3;
    m.pair_rule = MethodSpec::PairRule::explicit_list;
    m.pairs = {{1.0, 0.1}};
    cfg.methods = {m};
    cfg.k_values = {1.0, 3.0};
    cfg.replicates = 2;
    const StudyResult res = run_study(cfg, 1);
    CHECK(res.outcomes.size() == 2 * 2);  // replicates x k values
    for (const auto& out : res.outcomes) {
        CHECK(out.error.empty());
        CHECK(out.chosen_config.lambda_alpha == 1.0);
        CHECK(out.chosen_config.lambda_beta == 0.1);
        // screened dimension: d = min(round(k n / ln n), p)
        CHECK(out.fit.params.p() <= 40);
        // metrics computed on the full space
        CHECK(out.metrics.tp + out.metrics.fp + out.metrics.tn + out.metrics.fn == 40);
    }
}

TEST_CASE("pair rules resolve against the grid") {
    GridSpec grid;
    grid.lambda_alpha_values = {0.1, 1.0, 2.0};
    grid.lambda_beta_values = {0.1, 1.0, 2.0};
    MethodSpec m;
    m.name = "x";
    m.pair_rule = MethodSpec::PairRule::all;
    CHECK(m.resolve_pairs(grid).size() == 9);
    m.pair_rule = MethodSpec::PairRule::equal;
    CHECK(m.resolve_pairs(grid).size() == 3);
    m.pair_rule = MethodSpec::PairRule::asym;
    const auto asym = m.resolve_pairs(grid);
    CHECK(asym.size() == 3);
    for (const auto& [la, lb] : asym) CHECK(la > lb);
}

TEST_CASE("study config json round trip") {
    StudyConfig cfg = smoke_study();
    cfg.k_values = {3.0, 8.0};
    cfg.p_values = {40, 60};
    const StudyConfig back = study_config_from_json(to_json(cfg));
    CHECK(back.replicates == cfg.replicates);
    CHECK(back.methods.size() == 2);
    CHECK(back.methods[1].strategy == GammaStrategy::SMD);
    CHECK(back.k_values == cfg.k_values);
    CHECK(back.p_values == cfg.p_values);
    CHECK(to_json(back) == to_json(cfg));
}

TEST_CASE("cli: simulate produces schema-valid reproducible files") {
    oracle::TempDir dir("cli_sim");
    const auto config = dir.path / "scenario.json";
    Scenario sc;
    sc.p = 20;
    sc.n = 25;
    sc.seed = 11;
    write_json_file(to_json(sc), config);

    const auto out1 = dir.path / "run1";
    const auto out2 = dir.path / "run2";
    REQUIRE(run_cli("simulate --config " + config.string() + " --out " + out1.string() +
                    " --replicates 2") == 0);
    REQUIRE(run_cli("simulate --config " + config.string() + " --out " + out2.string() +
                    " --replicates 2") == 0);

    CHECK(slurp(out1 / "dataset_000.csv") == slurp(out2 / "dataset_000.csv"));
    CHECK(slurp(out1 / "dataset_001.csv") == slurp(out2 / "dataset_001.csv"));
    CHECK(slurp(out1 / "truth_000.json") == slurp(out2 / "truth_000.json"));
    CHECK(slurp(out1 / "dataset_000.csv") != slurp(out1 / "dataset_001.csv"));

    const std::filesystem::path schemas = std::filesystem::path(MEDPATH_SOURCE_DIR) / "schemas";
    CHECK(schema_errors(read_json_file(out1 / "truth_000.json"),
                        read_json_file(schemas / "truth.schema.json"))
              .empty());
    CHECK(schema_errors(read_json_file(out1 / "manifest.json"),
                        read_json_file(schemas / "manifest.schema.json"))
              .empty());

    // the dataset matches the library-level generator
    const auto [data, truth] = generate(sc);
    const Dataset loaded = read_dataset_csv(out1 / "dataset_000.csv");
    CHECK(loaded.y == data.y);
    CHECK(loaded.m == data.m);
}

TEST_CASE("cli: screen matches the library and honors --d") {
    oracle::TempDir dir("cli_screen");
    const Dataset data = oracle::random_dataset(3, 30, 10);
    const auto csv = dir.path / "data.csv";
    write_dataset_csv(data, csv);

    const auto out = dir.path / "out";
    REQUIRE(run_cli("screen --data " + csv.string() + " --d 4 --out " + out.string()) == 0);
    const Json sj = read_json_file(out / "screen.json");
    ScreenConfig cfg;
    cfg.d_override = 4;
    const ScreenResult expected = sis_screen(data, cfg);
    REQUIRE(sj["kept_indices"].size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(sj["kept_indices"][i].get<Index>() == expected.kept_indices[i]);
    const Dataset screened = read_dataset_csv(out / "screened.csv");
    CHECK(screened.p() == 4);
    CHECK(screened.m == expected.screened.m);

    // d > p is a usage error (exit 2)
    CHECK(run_cli("screen --data " + csv.string() + " --d 99 --out " + out.string()) == 2);
}

TEST_CASE("cli: fit and evaluate round trip") {
    oracle::TempDir dir("cli_fit");
    Scenario sc;
    sc.p = 15;
    sc.n = 30;
    sc.seed = 4;
    const auto [data, truth] = generate(sc);
    const auto csv = dir.path / "data.csv";
    write_dataset_csv(data, csv);
    const auto truth_path = dir.path / "truth.json";
    write_json_file(to_json(truth), truth_path);

    PenaltyConfig pen;
    pen.lambda_alpha = 1.0;
    pen.lambda_beta = 0.1;
    pen.lambda_gamma = 0.3;
    pen.strategy = GammaStrategy::SMD;
    pen.gamma_floor = 0.3;
    const auto pen_path = dir.path / "penalty.json";
    write_json_file(to_json(pen), pen_path);

    const auto out = dir.path / "fit_out";
    REQUIRE(run_cli("fit --data " + csv.string() + " --config " + pen_path.string() +
                    " --out " + out.string()) == 0);
    const FitResult cli_fit = fit_result_from_json(read_json_file(out / "fit.json"));
    const FitResult lib_fit = fit(data, pen, SolverConfig{});
    CHECK(cli_fit.params.alpha == lib_fit.params.alpha);
    CHECK(cli_fit.params.gamma == lib_fit.params.gamma);

    const auto ev_out = dir.path / "eval_out";
    REQUIRE(run_cli("evaluate --fit " + (out / "fit.json").string() + " --truth " +
                    truth_path.string() + " --out " + ev_out.string()) == 0);
    const MetricsReport m = metrics_report_from_json(read_json_file(ev_out / "metrics.json"));
    const MetricsReport expected =
        evaluate_against_truth(lib_fit.params, truth.params, 1e-8);
    CHECK(m.tpr == doctest::Approx(expected.tpr));
    CHECK(m.tp == expected.tp);
}

TEST_CASE("cli: grid-search emits table and best") {
    oracle::TempDir dir("cli_grid");
    const Dataset data = oracle::random_dataset(8, 25, 4);
    const auto csv = dir.path / "data.csv";
    write_dataset_csv(data, csv);

    Json config;
    config["grid"] = Json{{"lambda_alpha_values", {0.1, 1.0}},
                          {"lambda_beta_values", {0.1, 1.0}},
                          {"lambda_gamma_values", {0.0, 0.5}},
                          {"strategy", "TR"},
                          {"gamma_floor", 0.0}};
    const auto cfg_path = dir.path / "grid.json";
    write_json_file(config, cfg_path);

    const auto out = dir.path / "out";
    REQUIRE(run_cli("grid-search --data " + csv.string() + " --config " + cfg_path.string() +
                    " --out " + out.string() + " --jobs 2") == 0);
    const std::string table = slurp(out / "table.csv");
    CHECK(table.find("lambda_alpha,lambda_beta,lambda_gamma") == 0);
    // 2*2*2 rows + header
    CHECK(std::count(table.begin(), table.end(), '\n') == 9);
    const Json best = read_json_file(out / "best.json");
    CHECK(best.contains("config"));
    CHECK(best.contains("fit"));
}

TEST_CASE("cli: replicate writes aggregate, long table and manifests") {
    oracle::TempDir dir("cli_rep");
    const StudyConfig cfg = smoke_study();
    const auto cfg_path = dir.path / "study.json";
    write_json_file(to_json(cfg), cfg_path);

    const auto out1 = dir.path / "out1";
    const auto out2 = dir.path / "out2";
    REQUIRE(run_cli("replicate --config " + cfg_path.string() + " --out " + out1.string() +
                    " --jobs 2") == 0);
    REQUIRE(run_cli("replicate --config " + cfg_path.string() + " --out " + out2.string() +
                    " --jobs 1") == 0);

    // byte-identical numeric outputs regardless of scheduling
    CHECK(slurp(out1 / "aggregate.csv") == slurp(out2 / "aggregate.csv"));
    CHECK(slurp(out1 / "long.csv") == slurp(out2 / "long.csv"));

    const std::string agg = slurp(out1 / "aggregate.csv");
    CHECK(agg.find("method,p,k,replicates") == 0);
    CHECK(agg.find("TR_L") != std::string::npos);
    CHECK(agg.find("SMD_L") != std::string::npos);
    CHECK(std::filesystem::exists(out1 / "replicates" / "r000" / "TR_L_p40.json"));

    // long rows = cells x metrics-per-cell (19 with both rb values)
    const std::string long_rows = slurp(out1 / "long.csv");
    CHECK(std::count(long_rows.begin(), long_rows.end(), '\n') == 1 + 6 * 19);

    // report summarizes the long table
    const auto rpt = dir.path / "rpt";
    REQUIRE(run_cli("report --in " + out1.string() + " --out " + rpt.string()) == 0);
    const std::string summary = slurp(rpt / "summary.csv");
    CHECK(summary.find("method,p,k,metric,mean,sd,n") == 0);
    CHECK(summary.find("SMD_L") != std::string::npos);
}

TEST_CASE("cli: exit codes for config, io and usage errors") {
    oracle::TempDir dir("cli_exit");
    // missing file -> io error 3
    CHECK(run_cli("fit --data " + (dir.path / "nope.csv").string() + " --config " +
                  (dir.path / "nope.json").string() + " --out " + dir.path.string()) == 3);
    // malformed config -> 2
    const auto bad = dir.path / "bad.json";
    atomic_write_text(bad, "{not json");
    const Dataset data = oracle::random_dataset(2, 10, 2);
    const auto csv = dir.path / "d.csv";
    write_dataset_csv(data, csv);
    CHECK(run_cli("fit --data " + csv.string() + " --config " + bad.string() + " --out " +
                  dir.path.string()) == 2);
    // unknown flag -> 2 (usage)
    CHECK(run_cli("fit --frobnicate") == 2);
    // screen without --k/--d -> 2
    CHECK(run_cli("screen --data " + csv.string() + " --out " + dir.path.string()) == 2);
}
