#pragma once

#include <optional>
#include <vector>

#include "medpath/types.hpp"

namespace medpath {

struct ScreenConfig {
    double k = 1.0;                       // scaling factor in d = k*n/ln(n)
    std::optional<Index> d_override;      // explicit reduced dimension

    void validate() const;
};

struct ScreenResult {
    std::vector<Index> kept_indices;  // original 1-based indices, descending score
    Vec scores;                       // |cor(m_i, y)| for every mediator
    Dataset screened;                 // columns in kept_indices order
};

// d = round-half-away-from-zero of k*n/ln(n), clamped to >= 1. Natural
// log; this is the only base/rounding combination that reproduces the
// published dimensions.
Index reduced_dim(Index n, double k);

// Keeps the d mediators with the largest absolute Pearson correlation
// with the outcome (ties break toward the smaller original index).
ScreenResult sis_screen(const Dataset& data, const ScreenConfig& cfg, int jobs = 1);

}  // namespace medpath
