#pragma once

#include <string>
#include <utility>

#include "medpath/types.hpp"

namespace medpath {

enum class PenaltyVariant { lasso, pathway };

// Handling of the direct-effect penalty weight:
//   TR  - no penalty on gamma (lambda_gamma forced to 0)
//   MD  - penalized, any lambda_gamma > 0
//   SMD - penalized with a floor, lambda_gamma >= gamma_floor
enum class GammaStrategy { TR, MD, SMD };

std::string to_string(PenaltyVariant v);
std::string to_string(GammaStrategy s);
PenaltyVariant penalty_variant_from_string(const std::string& s);
GammaStrategy gamma_strategy_from_string(const std::string& s);

struct PenaltyConfig {
    PenaltyVariant variant = PenaltyVariant::lasso;
    double lambda_alpha = 0.0;
    double lambda_beta = 0.0;
    double lambda_gamma = 0.0;
    double gamma_floor = 0.0;   // floor c, active under SMD
    double kappa = 0.0;         // pathway pair weight
    double nu = 2.0;            // pathway ridge weight, >= 0.5 for convexity
    GammaStrategy strategy = GammaStrategy::TR;

    void validate() const;
};

// Penalty evaluated at params:
//   lasso:   la*sum|a_i| + lb*sum|b_i| + lg*|g|
//   pathway: the same plus kappa*sum[|a_i b_i| + nu*(a_i^2 + b_i^2)]
double penalty_value(const PenaltyConfig& config, const MediationParams& params);

// Half the loglik plus the penalty; the quantity the solver minimizes.
double objective(const PenaltyConfig& config, const MediationParams& params,
                 const Dataset& data);

// Soft threshold: sign(v) * max(|v| - t, 0).
double prox_l1(double v, double t);

// Exact minimizer over (x, y) of
//   (1/(2*step)) * [(x-a)^2 + (y-b)^2]
//   + kappa*(|x y| + nu*(x^2 + y^2)) + la*|x| + lb*|y|
// by sign-quadrant case analysis. Convex for nu >= 0.5.
std::pair<double, double> prox_pathway_pair(double a, double b, double step,
                                            double kappa, double nu,
                                            double la, double lb);

// Maps a requested lambda_gamma through the strategy rule:
// TR -> 0; MD -> requested (must be > 0); SMD -> max(requested, floor).
double effective_lambda_gamma(const PenaltyConfig& config, double requested);

}  // namespace medpath
