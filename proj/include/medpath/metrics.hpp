#pragma once

#include <optional>
#include <vector>

#include "medpath/types.hpp"

namespace medpath {

// Support-recovery and estimation-accuracy metrics. Classification
// fields are filled by recovery_metrics, accuracy fields by
// estimation_metrics; combine() merges the two halves.
struct MetricsReport {
    double tpr = 0.0;
    double tnr = 0.0;
    double tdr = 0.0;
    double f1 = 0.0;
    double youden = 0.0;
    double mse_alpha = 0.0;
    double mse_beta = 0.0;
    double mse_ie = 0.0;
    std::optional<double> rb_ie;  // absent when the true total is zero
    std::optional<double> rb_de;
    long tp = 0, fp = 0, tn = 0, fn = 0;
};

// entry true iff |v_i| > tol
std::vector<bool> support_of(const Vec& v, double tol);

// Rates from two supports of equal length. Degenerate conventions:
// no true positives -> tpr = 1, no true negatives -> tnr = 1,
// no predicted positives -> tdr = 0.
MetricsReport recovery_metrics(const std::vector<bool>& est_support,
                               const std::vector<bool>& true_support);

// MSE over alpha, beta and the products, plus relative bias of the
// aggregate totals: rb_ie = (sum est_ie - sum true_ie) / sum true_ie,
// rb_de analogous on gamma. RB is absent when the true total is zero.
MetricsReport estimation_metrics(const MediationParams& est, const MediationParams& truth);

MetricsReport combine(const MetricsReport& recovery, const MetricsReport& estimation);

// Full report of an estimate against the ground truth. The indirect
// effect is supported iff both factors are (est side thresholded at tol,
// truth side likewise).
MetricsReport evaluate_against_truth(const MediationParams& est,
                                     const MediationParams& truth, double tol);

}  // namespace medpath
