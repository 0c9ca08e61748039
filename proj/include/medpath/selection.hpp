#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "medpath/metrics.hpp"
#include "medpath/penalties.hpp"
#include "medpath/solver.hpp"
#include "medpath/types.hpp"

namespace medpath {

// BIC = q ln(n) + fit_loglik, where fit_loglik is the loglik operation's
// value (which equals -2 ln L up to an additive constant).
inline double bic(double fit_loglik, int q, Index n) {
    if (n < 2) throw ContractError("bic: n must be >= 2");
    if (q < 0) throw ContractError("bic: q must be >= 0");
    return static_cast<double>(q) * std::log(static_cast<double>(n)) + fit_loglik;
}

// 72 penalty values spanning [0, 100]: {0}, 21 log-spaced points on
// [0.001, 0.1], and 50 log-spaced points on (0.1, 100], dense near the
// floor region the direct-effect strategies operate in.
std::vector<double> default_lambda_gamma_grid();

struct GridSpec {
    std::vector<double> lambda_alpha_values{0.001, 0.01, 0.1, 1.0, 2.0, 5.0, 10.0};
    std::vector<double> lambda_beta_values{0.001, 0.01, 0.1, 1.0, 2.0, 5.0, 10.0};
    std::vector<double> lambda_gamma_values = default_lambda_gamma_grid();
    GammaStrategy strategy = GammaStrategy::TR;
    double gamma_floor = 0.0;

    std::size_t size() const {
        return lambda_alpha_values.size() * lambda_beta_values.size() *
               lambda_gamma_values.size();
    }
    void validate() const;
};

// One table row per grid triple, in canonical order (lambda_alpha, then
// lambda_beta, then lambda_gamma, each ascending). config carries the
// strategy-effective lambda_gamma; the requested value is kept alongside.
struct GridPoint {
    PenaltyConfig config;
    double requested_lambda_gamma = 0.0;
    FitResult result;
};

struct GridSearchResult {
    std::vector<GridPoint> table;
    std::size_t best = 0;
    std::vector<std::size_t> ties;  // all indices attaining the minimal BIC
};

// Fits every grid point (warm-started along the lambda_gamma axis) and
// selects the minimal-BIC point. Ties break toward the larger total
// penalty (the sparser model), then canonical order. Failed points are
// flagged in the table and excluded from selection. Independent
// (lambda_alpha, lambda_beta) chains run in parallel when jobs > 1;
// assembly order is canonical regardless of scheduling.
GridSearchResult grid_search(const Dataset& data, const GridSpec& grid,
                             const PenaltyConfig& pen_base, const SolverConfig& cfg,
                             int jobs = 1);

// Per-sample table row for the two-stage protocol.
struct SampleRow {
    PenaltyConfig config;
    FitResult fit;
    MetricsReport metrics;
};

struct TwoStageAggregate {
    MetricsReport mean_metrics;
    double mean_de = 0.0;
    double mean_tie = 0.0;
    double mean_te = 0.0;
    double mean_bic = 0.0;
    double mean_q = 0.0;
    std::vector<std::size_t> chosen;  // stage-1 pick per sample
};

// Stage 1 picks the BIC-optimal row per sample (same tie-break as
// grid_search); stage 2 averages every metric arithmetically across the
// chosen models. All samples must share the same config grid.
TwoStageAggregate two_stage_select(const std::vector<std::vector<SampleRow>>& per_sample);

// Shared stage-1 rule. bic_of returns NaN for rows excluded from
// selection. Returns count if every row is excluded.
std::size_t pick_best_index(std::size_t count,
                            const std::function<double(std::size_t)>& bic_of,
                            const std::function<double(std::size_t)>& total_penalty_of,
                            std::vector<std::size_t>* ties = nullptr);

}  // namespace medpath
