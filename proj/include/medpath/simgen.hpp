#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "medpath/types.hpp"

namespace medpath {

struct SignalTier {
    double fraction = 0.05;  // of p
    double mean = 6.0;
    double sd = 0.1;
};

// Generative description of a simulation design. Defaults reproduce the
// base scenario: n = 50, binary exposure, first 20% of alpha nonzero,
// beta nonzero on the first and third 10% blocks, signal tiers
// N(6, 0.1) / N(4, 0.1), compound-symmetry mediator noise and N(0, 0.1^2)
// outcome noise.
struct Scenario {
    Index n = 50;
    Index p = 200;
    double gamma_true = 2.0;
    double frac_alpha_nonzero = 0.20;
    // ordered fractions of p: (beta nonzero, beta zero, beta nonzero, beta zero)
    std::vector<double> beta_pattern{0.10, 0.10, 0.10, 0.70};
    SignalTier large_signal{0.05, 6.0, 0.1};
    SignalTier small_signal{0.05, 4.0, 0.1};
    double mediator_rho = 0.1;  // compound symmetry off-diagonal (diag 1)
    double outcome_sd = 0.1;
    std::uint64_t seed = 1;
    std::optional<double> target_tie;  // rescales tier means so E[TIE] hits this

    void validate() const;
};

enum class MediatorType { Type1, Type2, Type3, Type4 };

struct Truth {
    MediationParams params;
    Effects effects;  // realized effects of the drawn parameters
    std::vector<MediatorType> mediator_type;
    Vec outcome_noise;  // zeta; y = x*gamma + m*beta + zeta exactly
};

// Draws one dataset plus its ground truth, fully reproducible from the
// scenario seed (counter-based streams; see rng.hpp).
std::pair<Dataset, Truth> generate(const Scenario& sc);

// The direct-effect sweep: ten copies of the base scenario with
// gamma_true in {36, 80, 137, 213, 320, 480, 747, 1280, 2880, 6080} and
// tier means rescaled so E[TIE] = 320, walking the mediation proportion
// from 90% down to 5%.
std::vector<Scenario> de_sweep_scenarios(const Scenario& base);

// Expected TIE under the scenario's tier layout (sum of squared tier
// means over the Type1 block).
double expected_tie(const Scenario& sc);

}  // namespace medpath
