#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "medpath/metrics.hpp"
#include "medpath/selection.hpp"
#include "medpath/simgen.hpp"
#include "medpath/solver.hpp"

namespace medpath {

// One estimation method in a replicate study: a penalty variant plus the
// direct-effect strategy and a rule restricting which (lambda_alpha,
// lambda_beta) pairs of the grid it searches.
struct MethodSpec {
    enum class PairRule { all, equal, asym, explicit_list };

    std::string name;
    PenaltyVariant variant = PenaltyVariant::lasso;
    GammaStrategy strategy = GammaStrategy::TR;
    double gamma_floor = 0.0;
    double kappa = 0.0;
    double nu = 2.0;
    PairRule pair_rule = PairRule::all;
    std::vector<std::pair<double, double>> pairs;  // explicit_list only

    // Resolved pair list against a grid (equal: la == lb; asym: la > lb).
    std::vector<std::pair<double, double>> resolve_pairs(const GridSpec& grid) const;
    void validate() const;
};

struct StudyConfig {
    Scenario scenario;
    std::vector<Index> p_values;  // empty -> use scenario.p
    int replicates = 3;
    std::vector<MethodSpec> methods;
    GridSpec grid;  // lambda lists; strategy/floor are per method
    SolverConfig solver;
    std::vector<double> k_values;  // non-empty -> SIS sweep before fitting
    std::uint64_t seed = 1;        // replicate r is generated with seed + r

    void validate() const;
};

// Chosen model of one (replicate, p, k, method) cell. For screened runs
// the fit lives on the reduced space; metrics are computed against the
// full-p truth with screened-out coordinates at zero.
struct ReplicateOutcome {
    std::string method;
    Index p = 0;
    double k = 0.0;  // 0 = no screening
    int replicate = 0;
    PenaltyConfig chosen_config;
    double requested_lambda_gamma = 0.0;
    FitResult fit;
    MetricsReport metrics;
    std::string error;  // non-empty when the whole cell failed
};

struct StudyAggregate {
    std::string method;
    Index p = 0;
    double k = 0.0;
    int n_replicates = 0;  // successful ones
    MetricsReport mean_metrics;
    double mean_de = 0.0, mean_tie = 0.0, mean_te = 0.0;
    double mean_bic = 0.0, mean_q = 0.0;
    double frac_converged = 0.0;
};

struct StudyResult {
    std::vector<ReplicateOutcome> outcomes;    // canonical order
    std::vector<StudyAggregate> aggregates;    // keyed (method, p, k)
};

// Runs simulate -> (screen) -> grid search -> BIC pick -> evaluate for
// every cell, in parallel over (p, replicate) tasks, then aggregates
// means per (method, p, k). Stage-1 selection and stage-2 averaging
// follow the two-stage protocol, streamed one replicate at a time.
StudyResult run_study(const StudyConfig& cfg, int jobs);

// Long-format rows (method, p, k, replicate, metric, value) and the
// aggregate table as CSV text.
std::string long_csv(const StudyResult& result);
std::string aggregate_csv(const StudyResult& result);

nlohmann::json to_json(const StudyConfig& cfg);
StudyConfig study_config_from_json(const nlohmann::json& j);

}  // namespace medpath
