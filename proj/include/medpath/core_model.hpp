#pragma once

#include "medpath/types.hpp"

namespace medpath {

// Twice the negative log-likelihood up to an additive constant, assuming
// unit error variance:
//   tr{(M - x a')'(M - x a')} + (y - x g - M b)'(y - x g - M b).
// Always >= 0; zero iff both residual blocks vanish.
double loglik(const MediationParams& params, const Dataset& data);

// The two residual blocks separately (mediator block depends on alpha
// only, outcome block on (beta, gamma) only). loglik = sum of the two.
double loglik_mediator_block(const Vec& alpha, const Dataset& data);
double loglik_outcome_block(const Vec& beta, double gamma, const Dataset& data);

// Product-coefficient effect decomposition.
Effects effects(const MediationParams& params);

enum class StandardizeMode { none, unit_scale };

// unit_scale centers y and each mediator column to mean 0 / sample sd 1
// and centers x only (binary coding preserved up to shift). none is the
// identity. Zero-variance columns are an error naming the column.
Dataset standardize(const Dataset& data, StandardizeMode mode);

}  // namespace medpath
