#include "medpath/simgen.hpp"

#include <cmath>
#include <string>

#include "medpath/core_model.hpp"
#include "medpath/rng.hpp"

namespace medpath {

namespace {

// documented rounding rule for fraction-to-count conversion
Index round_half_up(double x) { return static_cast<Index>(std::floor(x + 0.5)); }

constexpr std::uint64_t kStreamExposure = 1;
constexpr std::uint64_t kStreamAlpha = 2;
constexpr std::uint64_t kStreamBeta = 3;
constexpr std::uint64_t kStreamMediatorNoise = 4;
constexpr std::uint64_t kStreamOutcomeNoise = 5;

struct Layout {
    Index n_type1, n_type3, n_type2;       // contiguous blocks in this order
    Index large_per_block;                 // large tier leads inside each block
    double scale;                          // tier-mean rescale (target_tie)
};

Layout layout_of(const Scenario& sc) {
    Layout lay;
    const double p = static_cast<double>(sc.p);
    lay.n_type1 = round_half_up(p * sc.beta_pattern[0]);
    lay.n_type3 = round_half_up(p * sc.beta_pattern[1]);
    lay.n_type2 = round_half_up(p * sc.beta_pattern[2]);
    if (lay.n_type1 + lay.n_type3 + lay.n_type2 > sc.p)
        throw ContractError("scenario: block counts exceed p");
    lay.large_per_block = round_half_up(p * sc.large_signal.fraction);
    lay.scale = 1.0;
    if (sc.target_tie) {
        const Index nl = std::min(lay.large_per_block, lay.n_type1);
        const Index ns = lay.n_type1 - nl;
        const double base = static_cast<double>(nl) * sc.large_signal.mean * sc.large_signal.mean +
                            static_cast<double>(ns) * sc.small_signal.mean * sc.small_signal.mean;
        if (base <= 0.0)
            throw ContractError("scenario: target_tie is infeasible, expected TIE is zero");
        lay.scale = std::sqrt(*sc.target_tie / base);
    }
    return lay;
}

}  // namespace

void Scenario::validate() const {
    if (n < 2) throw ContractError("scenario: n must be >= 2");
    if (p < 1) throw ContractError("scenario: p must be >= 1");
    if (beta_pattern.size() != 4)
        throw ContractError("scenario: beta_pattern must have 4 fractions");
    double sum = 0.0;
    for (double f : beta_pattern) {
        if (f < 0.0 || f > 1.0) throw ContractError("scenario: beta_pattern fraction outside [0,1]");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ContractError("scenario: beta_pattern fractions must sum to 1");
    if (std::abs(frac_alpha_nonzero - (beta_pattern[0] + beta_pattern[1])) > 1e-9)
        throw ContractError("scenario: frac_alpha_nonzero must equal the first two "
                            "beta_pattern fractions (the alpha support spans them)");
    if (std::abs(large_signal.fraction + small_signal.fraction - beta_pattern[0]) > 1e-9)
        throw ContractError("scenario: signal tier fractions must sum to one nonzero block");
    if (large_signal.sd <= 0.0 || small_signal.sd <= 0.0 || outcome_sd <= 0.0)
        throw ContractError("scenario: standard deviations must be > 0");
    if (p > 1 && (mediator_rho <= -1.0 / static_cast<double>(p - 1) || mediator_rho >= 1.0))
        throw ContractError("scenario: mediator_rho outside (-1/(p-1), 1)");
    if (target_tie && *target_tie <= 0.0)
        throw ContractError("scenario: target_tie must be > 0");
    layout_of(*this);  // block feasibility
}

double expected_tie(const Scenario& sc) {
    const Layout lay = layout_of(sc);
    const Index nl = std::min(lay.large_per_block, lay.n_type1);
    const Index ns = lay.n_type1 - nl;
    const double ml = lay.scale * sc.large_signal.mean;
    const double ms = lay.scale * sc.small_signal.mean;
    return static_cast<double>(nl) * ml * ml + static_cast<double>(ns) * ms * ms;
}

std::pair<Dataset, Truth> generate(const Scenario& sc) {
    sc.validate();
    const Layout lay = layout_of(sc);
    const Index n = sc.n, p = sc.p;

    Truth truth;
    truth.params = MediationParams::zero(p);
    truth.mediator_type.assign(static_cast<std::size_t>(p), MediatorType::Type4);

    // Deterministic block layout: Type1 | Type3 | Type2 | Type4, large
    // tier ahead of small tier inside every nonzero block.
    const auto tier_mean = [&](Index offset_in_block) {
        const SignalTier& tier =
            offset_in_block < lay.large_per_block ? sc.large_signal : sc.small_signal;
        return std::pair<double, double>{lay.scale * tier.mean, tier.sd};
    };

    CounterRng rng_alpha(sc.seed, kStreamAlpha);
    CounterRng rng_beta(sc.seed, kStreamBeta);
    for (Index i = 0; i < lay.n_type1; ++i) {
        const auto [mean, sd] = tier_mean(i);
        truth.params.alpha[i] = rng_alpha.normal(mean, sd);
        truth.params.beta[i] = rng_beta.normal(mean, sd);
        truth.mediator_type[static_cast<std::size_t>(i)] = MediatorType::Type1;
    }
    for (Index j = 0; j < lay.n_type3; ++j) {
        const Index i = lay.n_type1 + j;
        const auto [mean, sd] = tier_mean(j);
        truth.params.alpha[i] = rng_alpha.normal(mean, sd);
        truth.mediator_type[static_cast<std::size_t>(i)] = MediatorType::Type3;
    }
    for (Index j = 0; j < lay.n_type2; ++j) {
        const Index i = lay.n_type1 + lay.n_type3 + j;
        const auto [mean, sd] = tier_mean(j);
        truth.params.beta[i] = rng_beta.normal(mean, sd);
        truth.mediator_type[static_cast<std::size_t>(i)] = MediatorType::Type2;
    }
    truth.params.gamma = sc.gamma_true;

    Dataset data;
    CounterRng rng_x(sc.seed, kStreamExposure);
    data.x.resize(n);
    for (Index j = 0; j < n; ++j) data.x[j] = static_cast<double>(rng_x.bernoulli(0.5));

    // Compound-symmetry noise via the closed-form symmetric square root:
    // sqrt(S) = a I + b 11', a = sqrt(1-rho), b = (sqrt(1+(p-1)rho) - a)/p.
    const double rho = sc.mediator_rho;
    const double a = std::sqrt(1.0 - rho);
    const double b =
        (std::sqrt(1.0 + rho * static_cast<double>(p - 1)) - a) / static_cast<double>(p);
    CounterRng rng_eps(sc.seed, kStreamMediatorNoise);
    data.m.resize(n, p);
    Vec z(p);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < p; ++i) z[i] = rng_eps.normal();
        const double zsum = z.sum();
        data.m.row(j) = (data.x[j] * truth.params.alpha + a * z + Vec::Constant(p, b * zsum))
                            .transpose();
    }

    CounterRng rng_zeta(sc.seed, kStreamOutcomeNoise);
    truth.outcome_noise.resize(n);
    for (Index j = 0; j < n; ++j) truth.outcome_noise[j] = rng_zeta.normal(0.0, sc.outcome_sd);
    data.y = data.x * truth.params.gamma + data.m * truth.params.beta + truth.outcome_noise;

    truth.effects = effects(truth.params);
    validate(data);
    return {std::move(data), std::move(truth)};
}

std::vector<Scenario> de_sweep_scenarios(const Scenario& base) {
    base.validate();
    if (base.n != 50 || base.p != 200)
        throw ContractError("de_sweep_scenarios: the sweep is defined for n=50, p=200");
    static const double kDirectEffects[] = {36,  80,  137,  213,  320,
                                            480, 747, 1280, 2880, 6080};
    std::vector<Scenario> out;
    out.reserve(10);
    for (double de : kDirectEffects) {
        Scenario sc = base;
        sc.gamma_true = de;
        sc.target_tie = 320.0;
        out.push_back(sc);
    }
    return out;
}

}  // namespace medpath
