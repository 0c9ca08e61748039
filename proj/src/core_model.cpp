#include "medpath/core_model.hpp"

#include <cmath>
#include <string>

namespace medpath {

void validate(const Dataset& data) {
    const Index n = data.x.size();
    const Index p = data.m.cols();
    if (n < 2) throw ContractError("dataset: need n >= 2 subjects, got " + std::to_string(n));
    if (p < 1) throw ContractError("dataset: need p >= 1 mediators, got " + std::to_string(p));
    if (data.y.size() != n || data.m.rows() != n)
        throw ContractError("dataset: inconsistent dimensions (x " + std::to_string(n) +
                            ", y " + std::to_string(data.y.size()) + ", m " +
                            std::to_string(data.m.rows()) + "x" + std::to_string(p) + ")");
    if (!data.x.allFinite() || !data.y.allFinite() || !data.m.allFinite())
        throw ContractError("dataset: non-finite entry");
}

void validate(const MediationParams& params) {
    if (params.alpha.size() != params.beta.size())
        throw ContractError("params: alpha and beta lengths differ (" +
                            std::to_string(params.alpha.size()) + " vs " +
                            std::to_string(params.beta.size()) + ")");
    if (!params.alpha.allFinite() || !params.beta.allFinite() || !std::isfinite(params.gamma))
        throw ContractError("params: non-finite entry");
}

namespace {

void check_match(const MediationParams& params, const Dataset& data) {
    if (params.alpha.size() != data.m.cols() || params.beta.size() != data.m.cols())
        throw ContractError("loglik: params dimension " + std::to_string(params.alpha.size()) +
                            " does not match p = " + std::to_string(data.m.cols()));
}

}  // namespace

double loglik_mediator_block(const Vec& alpha, const Dataset& data) {
    // tr{(M - x a')'(M - x a')} = sum_i ||m_i - x a_i||^2
    return (data.m - data.x * alpha.transpose()).squaredNorm();
}

double loglik_outcome_block(const Vec& beta, double gamma, const Dataset& data) {
    return (data.y - data.x * gamma - data.m * beta).squaredNorm();
}

double loglik(const MediationParams& params, const Dataset& data) {
    check_match(params, data);
    return loglik_mediator_block(params.alpha, data) +
           loglik_outcome_block(params.beta, params.gamma, data);
}

Effects effects(const MediationParams& params) {
    Effects eff;
    eff.de = params.gamma;
    eff.ie = params.alpha.cwiseProduct(params.beta);
    eff.tie = eff.ie.sum();
    eff.te = eff.de + eff.tie;
    return eff;
}

namespace {

double column_sd(const Vec& v) {
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

Dataset standardize(const Dataset& data, StandardizeMode mode) {
    if (mode == StandardizeMode::none) return data;

    Dataset out = data;
    out.x.array() -= out.x.mean();

    const double sd_y = column_sd(out.y);
    if (sd_y == 0.0) throw ContractError("standardize: column y has zero variance");
    out.y.array() -= out.y.mean();
    out.y /= sd_y;

    for (Index j = 0; j < out.m.cols(); ++j) {
        Vec col = out.m.col(j);
        const double sd = column_sd(col);
        if (sd == 0.0)
            throw ContractError("standardize: column m" + std::to_string(j + 1) +
                                " has zero variance");
        out.m.col(j) = (col.array() - col.mean()) / sd;
    }
    return out;
}

}  // namespace medpath
