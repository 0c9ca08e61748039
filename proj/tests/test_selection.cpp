#include <doctest.h>

#include <cmath>
#include <set>

#include "medpath/selection.hpp"
#include "test_support.hpp"

using namespace medpath;

TEST_CASE("bic formula") {
    CHECK(bic(100.0, 0, 50) == doctest::Approx(100.0));
    CHECK(bic(100.0, 3, 50) == doctest::Approx(100.0 + 3.0 * std::log(50.0)));
    CHECK(bic(100.0, 3, 50) == doctest::Approx(111.736).epsilon(1e-4));
    // one extra parameter costs exactly ln n
    CHECK(bic(42.0, 5, 50) - bic(42.0, 4, 50) == doctest::Approx(std::log(50.0)));
    CHECK_THROWS_AS(bic(1.0, -1, 50), ContractError);
    CHECK_THROWS_AS(bic(1.0, 0, 1), ContractError);
}

TEST_CASE("bic selection is invariant to loglik shifts") {
    const std::vector<double> logliks{10.0, 4.0, 7.5};
    const std::vector<int> qs{1, 3, 2};
    const auto argmin = [&](double shift) {
        std::size_t best = 0;
        double best_val = 1e300;
        for (std::size_t i = 0; i < logliks.size(); ++i) {
            const double v = bic(logliks[i] + shift, qs[i], 50);
            if (v < best_val) {
                best_val = v;
                best = i;
            }
        }
        return best;
    };
    CHECK(argmin(0.0) == argmin(1000.0));
    CHECK(argmin(0.0) == argmin(-55.5));
}

TEST_CASE("default grids have the documented sizes") {
    const GridSpec grid;
    CHECK(grid.lambda_alpha_values.size() == 7);
    CHECK(grid.lambda_beta_values.size() == 7);
    CHECK(grid.lambda_alpha_values.size() * grid.lambda_beta_values.size() == 49);
    CHECK(grid.lambda_gamma_values.size() == 72);
    CHECK(grid.size() == 3528);
    CHECK(grid.lambda_gamma_values.front() == 0.0);
    CHECK(grid.lambda_gamma_values.back() == doctest::Approx(100.0));
    for (double v : grid.lambda_gamma_values) {
        CHECK(v >= 0.0);
        CHECK(v <= 100.0 + 1e-12);
    }
    CHECK(std::is_sorted(grid.lambda_gamma_values.begin(), grid.lambda_gamma_values.end()));
}

TEST_CASE("grid_search on a single point equals fit") {
    const Dataset data = oracle::random_dataset(3, 20, 3);
    GridSpec grid;
    grid.lambda_alpha_values = {1.0};
    grid.lambda_beta_values = {0.5};
    grid.lambda_gamma_values = {0.2};
    grid.strategy = GammaStrategy::MD;
    PenaltyConfig base;
    const GridSearchResult res = grid_search(data, grid, base, SolverConfig{});
    REQUIRE(res.table.size() == 1);
    CHECK(res.best == 0);

    PenaltyConfig pen;
    pen.lambda_alpha = 1.0;
    pen.lambda_beta = 0.5;
    pen.lambda_gamma = 0.2;
    pen.strategy = GammaStrategy::MD;
    const FitResult direct = fit(data, pen, SolverConfig{});
    CHECK(res.table[0].result.objective == doctest::Approx(direct.objective).epsilon(1e-10));
    CHECK(res.table[0].result.bic == doctest::Approx(direct.bic).epsilon(1e-10));
}

TEST_CASE("grid_search: huge-penalty point wins on pure noise") {
    // outcome unrelated to x and m; the empty model has the lowest BIC
    Dataset data = oracle::random_dataset(5, 30, 3);
    GridSpec grid;
    grid.lambda_alpha_values = {0.001, 1e6};
    grid.lambda_beta_values = {0.001, 1e6};
    grid.lambda_gamma_values = {0.001, 1e6};
    grid.strategy = GammaStrategy::MD;
    const GridSearchResult res = grid_search(data, grid, PenaltyConfig{}, SolverConfig{});

    // independent recomputation of the BIC ordering
    std::size_t best = 0;
    double best_bic = 1e300;
    for (std::size_t i = 0; i < res.table.size(); ++i) {
        const auto& row = res.table[i];
        const double check =
            bic(oracle::loglik_bruteforce(row.result.params, data), row.result.q, data.n());
        CHECK(check == doctest::Approx(row.result.bic).epsilon(1e-10));
        if (check < best_bic) {
            best_bic = check;
            best = i;
        }
    }
    CHECK(res.best == best);
    CHECK(res.table[res.best].result.q == 0);
    const auto& cfg = res.table[res.best].config;
    CHECK(cfg.lambda_alpha == 1e6);
    CHECK(cfg.lambda_beta == 1e6);
}

TEST_CASE("grid_search table is in canonical order and strategy-mapped") {
    const Dataset data = oracle::random_dataset(9, 20, 2);
    GridSpec grid;
    grid.lambda_alpha_values = {0.1, 1.0};
    grid.lambda_beta_values = {0.2, 2.0};
    grid.lambda_gamma_values = {0.0, 0.1, 0.5};
    grid.strategy = GammaStrategy::SMD;
    grid.gamma_floor = 0.3;
    const GridSearchResult res = grid_search(data, grid, PenaltyConfig{}, SolverConfig{});
    REQUIRE(res.table.size() == 12);
    std::size_t idx = 0;
    for (double la : grid.lambda_alpha_values)
        for (double lb : grid.lambda_beta_values)
            for (double lg : grid.lambda_gamma_values) {
                const GridPoint& pt = res.table[idx++];
                CHECK(pt.config.lambda_alpha == la);
                CHECK(pt.config.lambda_beta == lb);
                CHECK(pt.requested_lambda_gamma == lg);
                // SMD clamps below the floor
                CHECK(pt.config.lambda_gamma == std::max(lg, 0.3));
                CHECK_FALSE(pt.result.failed());
            }
    // repeated searches are deterministic
    const GridSearchResult again = grid_search(data, grid, PenaltyConfig{}, SolverConfig{});
    CHECK(again.best == res.best);
    CHECK(again.ties == res.ties);
}

TEST_CASE("grid_search under MD flags the zero point and excludes it from best") {
    const Dataset data = oracle::random_dataset(13, 20, 2);
    GridSpec grid;
    grid.lambda_alpha_values = {1.0};
    grid.lambda_beta_values = {1.0};
    grid.lambda_gamma_values = {0.0, 0.5};
    grid.strategy = GammaStrategy::MD;
    const GridSearchResult res = grid_search(data, grid, PenaltyConfig{}, SolverConfig{});
    REQUIRE(res.table.size() == 2);
    CHECK(res.table[0].result.failed());
    CHECK_FALSE(res.table[1].result.failed());
    CHECK(res.best == 1);
}

TEST_CASE("grid_search lasso factorization matches brute-force fits") {
    const Dataset data = oracle::random_dataset(21, 25, 4);
    GridSpec grid;
    grid.lambda_alpha_values = {0.5, 2.0};
    grid.lambda_beta_values = {0.5, 2.0};
    grid.lambda_gamma_values = {0.1, 1.0};
    grid.strategy = GammaStrategy::MD;
    const SolverConfig cfg;
    const GridSearchResult res = grid_search(data, grid, PenaltyConfig{}, cfg);
    for (const auto& pt : res.table) {
        const FitResult direct = fit(data, pt.config, cfg);
        CHECK(std::abs(pt.result.objective - direct.objective) < 1e-6);
        CHECK(std::abs(pt.result.bic - direct.bic) < 1e-5);
    }
}

TEST_CASE("two_stage_select aggregates chosen models") {
    const auto make_row = [](double la, double bic_value, double tpr) {
        SampleRow row;
        row.config.lambda_alpha = la;
        row.config.lambda_beta = 0.1;
        row.config.lambda_gamma = 0.0;
        row.fit.bic = bic_value;
        row.fit.q = 1;
        row.fit.effects.de = la;  // distinguishable payload
        row.metrics.tpr = tpr;
        return row;
    };

    SUBCASE("one sample: aggregate equals that sample's best") {
        std::vector<std::vector<SampleRow>> samples{
            {make_row(1.0, 10.0, 0.4), make_row(2.0, 5.0, 0.9)}};
        const TwoStageAggregate agg = two_stage_select(samples);
        CHECK(agg.chosen == std::vector<std::size_t>{1});
        CHECK(agg.mean_metrics.tpr == doctest::Approx(0.9));
        CHECK(agg.mean_de == doctest::Approx(2.0));
    }

    SUBCASE("identical samples: mean equals either") {
        std::vector<SampleRow> table{make_row(1.0, 10.0, 0.4), make_row(2.0, 5.0, 0.9)};
        const TwoStageAggregate agg = two_stage_select({table, table});
        CHECK(agg.mean_metrics.tpr == doctest::Approx(0.9));
        CHECK(agg.mean_bic == doctest::Approx(5.0));
    }

    SUBCASE("means over stage-1 picks match a hand computation") {
        std::vector<std::vector<SampleRow>> samples;
        double expected_tpr = 0.0;
        for (int s = 0; s < 20; ++s) {
            // best row alternates; tpr payload differs per sample
            const double tpr_a = 0.3 + 0.01 * s, tpr_b = 0.8 - 0.01 * s;
            const bool a_wins = s % 2 == 0;
            samples.push_back({make_row(1.0, a_wins ? 1.0 : 9.0, tpr_a),
                               make_row(2.0, a_wins ? 9.0 : 1.0, tpr_b)});
            expected_tpr += a_wins ? tpr_a : tpr_b;
        }
        expected_tpr /= 20.0;
        const TwoStageAggregate agg = two_stage_select(samples);
        CHECK(agg.mean_metrics.tpr == doctest::Approx(expected_tpr).epsilon(1e-12));
    }

    SUBCASE("errors") {
        CHECK_THROWS_AS(two_stage_select({}), ContractError);
        std::vector<std::vector<SampleRow>> bad{{make_row(1.0, 1.0, 0.5)}, {}};
        CHECK_THROWS_AS(two_stage_select(bad), ContractError);
        std::vector<std::vector<SampleRow>> mismatched{{make_row(1.0, 1.0, 0.5)},
                                                       {make_row(9.0, 1.0, 0.5)}};
        CHECK_THROWS_AS(two_stage_select(mismatched), ContractError);
    }
}

TEST_CASE("tie-break prefers the larger total penalty") {
    std::vector<double> bics{7.0, 7.0, 9.0};
    std::vector<double> totals{1.0, 3.0, 5.0};
    std::vector<std::size_t> ties;
    const std::size_t best = pick_best_index(
        3, [&](std::size_t i) { return bics[i]; }, [&](std::size_t i) { return totals[i]; },
        &ties);
    CHECK(best == 1);
    CHECK(ties == std::vector<std::size_t>{0, 1});
}
