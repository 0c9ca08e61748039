#include "medpath/metrics.hpp"

#include <cmath>
#include <string>

namespace medpath {

std::vector<bool> support_of(const Vec& v, double tol) {
    if (tol <= 0.0) throw ContractError("support_of: tol must be > 0");
    std::vector<bool> s(static_cast<std::size_t>(v.size()));
    for (Index i = 0; i < v.size(); ++i) s[static_cast<std::size_t>(i)] = std::abs(v[i]) > tol;
    return s;
}

MetricsReport recovery_metrics(const std::vector<bool>& est_support,
                               const std::vector<bool>& true_support) {
    if (est_support.size() != true_support.size())
        throw ContractError("recovery_metrics: support lengths differ (" +
                            std::to_string(est_support.size()) + " vs " +
                            std::to_string(true_support.size()) + ")");
    MetricsReport r;
    for (std::size_t i = 0; i < est_support.size(); ++i) {
        if (true_support[i])
            est_support[i] ? ++r.tp : ++r.fn;
        else
            est_support[i] ? ++r.fp : ++r.tn;
    }
    r.tpr = (r.tp + r.fn) > 0 ? static_cast<double>(r.tp) / (r.tp + r.fn) : 1.0;
    r.tnr = (r.tn + r.fp) > 0 ? static_cast<double>(r.tn) / (r.tn + r.fp) : 1.0;
    r.tdr = (r.tp + r.fp) > 0 ? static_cast<double>(r.tp) / (r.tp + r.fp) : 0.0;
    r.f1 = (r.tpr + r.tdr) > 0.0 ? 2.0 * r.tpr * r.tdr / (r.tpr + r.tdr) : 0.0;
    r.youden = r.tpr + r.tnr - 1.0;
    return r;
}

MetricsReport estimation_metrics(const MediationParams& est, const MediationParams& truth) {
    if (est.p() != truth.p())
        throw ContractError("estimation_metrics: dimension mismatch (" +
                            std::to_string(est.p()) + " vs " + std::to_string(truth.p()) + ")");
    MetricsReport r;
    const double p = static_cast<double>(est.p());
    r.mse_alpha = (est.alpha - truth.alpha).squaredNorm() / p;
    r.mse_beta = (est.beta - truth.beta).squaredNorm() / p;
    const Vec est_ie = est.alpha.cwiseProduct(est.beta);
    const Vec true_ie = truth.alpha.cwiseProduct(truth.beta);
    r.mse_ie = (est_ie - true_ie).squaredNorm() / p;
    const double true_tie = true_ie.sum();
    if (true_tie != 0.0) r.rb_ie = (est_ie.sum() - true_tie) / true_tie;
    if (truth.gamma != 0.0) r.rb_de = (est.gamma - truth.gamma) / truth.gamma;
    return r;
}

MetricsReport combine(const MetricsReport& recovery, const MetricsReport& estimation) {
    MetricsReport r = recovery;
    r.mse_alpha = estimation.mse_alpha;
    r.mse_beta = estimation.mse_beta;
    r.mse_ie = estimation.mse_ie;
    r.rb_ie = estimation.rb_ie;
    r.rb_de = estimation.rb_de;
    return r;
}

MetricsReport evaluate_against_truth(const MediationParams& est,
                                     const MediationParams& truth, double tol) {
    const auto ie_support = [&](const MediationParams& params) {
        const std::vector<bool> sa = support_of(params.alpha, tol);
        const std::vector<bool> sb = support_of(params.beta, tol);
        std::vector<bool> s(sa.size());
        for (std::size_t i = 0; i < sa.size(); ++i) s[i] = sa[i] && sb[i];
        return s;
    };
    return combine(recovery_metrics(ie_support(est), ie_support(truth)),
                   estimation_metrics(est, truth));
}

}  // namespace medpath
