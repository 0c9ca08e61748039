#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "medpath/penalties.hpp"
#include "medpath/types.hpp"

namespace medpath {

struct SolverConfig {
    int max_iter = 5000;
    double tol_primal = 1e-6;
    double tol_dual = 1e-6;
    double rho = 1.0;            // initial augmented-Lagrangian weight
    double nonzero_tol = 1e-8;   // support detection threshold
    std::uint64_t seed = 0;      // reserved; initialization is deterministic
    bool record_trace = false;   // keep per-iteration best objective

    void validate() const;
};

struct FitResult {
    MediationParams params;
    Effects effects;
    double objective = 0.0;
    double bic = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<bool> support_alpha;
    std::vector<bool> support_beta;
    int q = 0;  // nonzero parameter count including gamma
    std::string error;  // non-empty marks a failed path/grid entry
    std::vector<double> objective_trace;  // only when record_trace

    bool failed() const { return !error.empty(); }
};

// Minimizes 0.5*loglik + penalty by ADMM. The alpha subproblem of the
// lasso variant is solved exactly (it separates from the rest); the
// pathway variant runs consensus ADMM over the full (alpha, beta, gamma)
// triple with prox_pathway_pair in the consensus step. Non-convergence
// within max_iter is reported via converged=false, not an exception.
FitResult fit(const Dataset& data, const PenaltyConfig& pen, const SolverConfig& cfg,
              const std::optional<MediationParams>& init = std::nullopt);

// Exact minimizer of the separable lasso alpha block:
// alpha_i = soft(x'm_i, lambda_alpha) / x'x. Errors if x'x = 0.
Vec lasso_alpha_exact(const Dataset& data, double lambda_alpha);

// Builds a complete result (supports, q, effects, objective, BIC) for
// given parameters; used wherever solutions are assembled from cached
// subproblem blocks.
FitResult make_fit_result(const Dataset& data, const PenaltyConfig& pen,
                          const SolverConfig& cfg, MediationParams params,
                          int iterations, bool converged);

// Sequential fits warm-started from the previous solution (full ADMM
// state is carried, so repeating a config converges immediately). All
// configs must share the penalty variant. A failed entry is flagged in
// its result and does not abort the rest of the path.
std::vector<FitResult> fit_path(const Dataset& data,
                                const std::vector<PenaltyConfig>& pens,
                                const SolverConfig& cfg);

// Reusable per-dataset solver state: factorizations of the design are
// computed once and shared across penalty configurations, and warm-start
// chains can be threaded through consecutive fits. The dataset must
// outlive the context.
class SolverContext {
public:
    explicit SolverContext(const Dataset& data);

    // warm=true continues from the internal chain state (if compatible);
    // otherwise starts from init (default all zeros).
    FitResult fit(const PenaltyConfig& pen, const SolverConfig& cfg,
                  const std::optional<MediationParams>& init = std::nullopt,
                  bool warm = false);

    void reset_chain() { has_state_ = false; }

private:
    struct Impl;
    FitResult fit_lasso(const PenaltyConfig& pen, const SolverConfig& cfg,
                        const std::optional<MediationParams>& init, bool warm);
    FitResult fit_pathway(const PenaltyConfig& pen, const SolverConfig& cfg,
                          const std::optional<MediationParams>& init, bool warm);
    FitResult finalize(const PenaltyConfig& pen, const SolverConfig& cfg,
                       MediationParams params, int iterations, bool converged) const;

    const Dataset* data_;
    Index p_;
    double xtx_ = 0.0;
    double yty_ = 0.0;
    double mtm_fro_ = 0.0;
    Vec xtm_;    // M' x
    Vec wty_;    // [M x]' y
    Mat evec_;   // eigenvectors of W'W, W = [M x]
    Vec eval_;   // eigenvalues of W'W (clamped at 0)

    // chain state for warm starts
    bool has_state_ = false;
    PenaltyVariant state_variant_ = PenaltyVariant::lasso;
    double state_rho_ = 1.0;
    Vec z_bg_, u_bg_;  // (beta, gamma) consensus block, length p+1
    Vec z_a_, u_a_;    // alpha consensus block (pathway), length p
};

}  // namespace medpath
