#include "medpath/penalties.hpp"

#include <algorithm>
#include <cmath>

#include "medpath/core_model.hpp"

namespace medpath {

std::string to_string(PenaltyVariant v) {
    return v == PenaltyVariant::lasso ? "lasso" : "pathway";
}

std::string to_string(GammaStrategy s) {
    switch (s) {
        case GammaStrategy::TR: return "TR";
        case GammaStrategy::MD: return "MD";
        default: return "SMD";
    }
}

PenaltyVariant penalty_variant_from_string(const std::string& s) {
    if (s == "lasso") return PenaltyVariant::lasso;
    if (s == "pathway") return PenaltyVariant::pathway;
    throw ContractError("unknown penalty variant '" + s + "' (expected lasso|pathway)");
}

GammaStrategy gamma_strategy_from_string(const std::string& s) {
    if (s == "TR") return GammaStrategy::TR;
    if (s == "MD") return GammaStrategy::MD;
    if (s == "SMD") return GammaStrategy::SMD;
    throw ContractError("unknown strategy '" + s + "' (expected TR|MD|SMD)");
}

void PenaltyConfig::validate() const {
    if (lambda_alpha < 0 || lambda_beta < 0 || lambda_gamma < 0 || gamma_floor < 0 || kappa < 0)
        throw ContractError("penalty: negative tuning parameter");
    if (variant == PenaltyVariant::pathway && nu < 0.5)
        throw ContractError("penalty: pathway requires nu >= 0.5, got " + std::to_string(nu));
    if (strategy == GammaStrategy::TR && lambda_gamma != 0.0)
        throw ContractError("penalty: TR strategy forces lambda_gamma = 0");
    if (strategy == GammaStrategy::SMD && lambda_gamma < gamma_floor)
        throw ContractError("penalty: SMD requires lambda_gamma >= gamma_floor");
}

double penalty_value(const PenaltyConfig& config, const MediationParams& params) {
    double value = config.lambda_alpha * params.alpha.lpNorm<1>() +
                   config.lambda_beta * params.beta.lpNorm<1>() +
                   config.lambda_gamma * std::abs(params.gamma);
    if (config.variant == PenaltyVariant::pathway) {
        const auto a = params.alpha.array();
        const auto b = params.beta.array();
        value += config.kappa *
                 ((a * b).abs() + config.nu * (a.square() + b.square())).sum();
    }
    return value;
}

double objective(const PenaltyConfig& config, const MediationParams& params,
                 const Dataset& data) {
    return 0.5 * loglik(params, data) + penalty_value(config, params);
}

double prox_l1(double v, double t) {
    const double shrunk = std::abs(v) - t;
    return shrunk <= 0.0 ? 0.0 : (v < 0.0 ? -shrunk : shrunk);
}

namespace {

// Proximal objective restricted to magnitudes (u, v) >= 0 with the signs
// of (a, b) already folded in.
inline double quadrant_value(double u, double v, double abs_a, double abs_b,
                             double step, double kappa, double nu,
                             double la, double lb) {
    const double du = u - abs_a, dv = v - abs_b;
    return 0.5 * (du * du + dv * dv) / step +
           kappa * (u * v + nu * (u * u + v * v)) + la * u + lb * v;
}

}  // namespace

std::pair<double, double> prox_pathway_pair(double a, double b, double step,
                                            double kappa, double nu,
                                            double la, double lb) {
    if (step < 0.0) throw ContractError("prox_pathway_pair: step must be >= 0");
    if (kappa < 0.0 || la < 0.0 || lb < 0.0)
        throw ContractError("prox_pathway_pair: negative penalty weight");
    if (step == 0.0) return {a, b};  // limit of the definition
    if (kappa == 0.0 && la == 0.0 && lb == 0.0) return {a, b};
    if (kappa > 0.0 && nu < 0.5)
        throw ContractError("prox_pathway_pair: nu >= 0.5 required");

    // The minimizer shares signs with (a, b) (the penalty is even in each
    // coordinate), so work with magnitudes in the nonnegative quadrant.
    const double abs_a = std::abs(a), abs_b = std::abs(b);
    const double sa = a < 0.0 ? -1.0 : 1.0, sb = b < 0.0 ? -1.0 : 1.0;

    // Stationarity in the open quadrant is the 2x2 system
    //   A u + kappa v = c1,  kappa u + A v = c2
    // with A = 1/step + 2 kappa nu; nu >= 0.5 keeps A > kappa.
    const double A = 1.0 / step + 2.0 * kappa * nu;
    const double c1 = abs_a / step - la;
    const double c2 = abs_b / step - lb;

    // Candidates: origin, the two axis minimizers, and the interior
    // stationary point when it lands in the open quadrant. The function is
    // convex on the quadrant, so the best of these is the minimizer.
    double best_u = 0.0, best_v = 0.0;
    double best = quadrant_value(0.0, 0.0, abs_a, abs_b, step, kappa, nu, la, lb);
    const auto consider = [&](double u, double v) {
        const double val = quadrant_value(u, v, abs_a, abs_b, step, kappa, nu, la, lb);
        if (val < best) {
            best = val;
            best_u = u;
            best_v = v;
        }
    };

    if (c1 > 0.0) consider(c1 / A, 0.0);
    if (c2 > 0.0) consider(0.0, c2 / A);
    const double det = A * A - kappa * kappa;
    if (det > 0.0) {
        const double u = (A * c1 - kappa * c2) / det;
        const double v = (A * c2 - kappa * c1) / det;
        if (u > 0.0 && v > 0.0) consider(u, v);
    }
    return {sa * best_u, sb * best_v};
}

double effective_lambda_gamma(const PenaltyConfig& config, double requested) {
    if (requested < 0.0) throw ContractError("effective_lambda_gamma: requested < 0");
    switch (config.strategy) {
        case GammaStrategy::TR:
            return 0.0;
        case GammaStrategy::MD:
            if (requested <= 0.0)
                throw ContractError("effective_lambda_gamma: MD requires lambda_gamma > 0");
            return requested;
        default:
            return std::max(requested, config.gamma_floor);
    }
}

}  // namespace medpath
