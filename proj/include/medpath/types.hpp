#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace medpath {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

// Bad user input: configs, dimensions, contract violations. CLI exit 2.
struct ContractError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Filesystem / parse failures. CLI exit 3.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exposure x (length n), mediator matrix m (n x p), outcome y (length n).
struct Dataset {
    Vec x;
    Mat m;
    Vec y;

    Index n() const { return x.size(); }
    Index p() const { return m.cols(); }
};

// Checks dimension consistency, n >= 2, p >= 1, finiteness.
void validate(const Dataset& data);

// Parameter triple of the structural model: m_i = x*alpha_i + eps,
// y = x*gamma + m*beta + zeta.
struct MediationParams {
    Vec alpha;
    Vec beta;
    double gamma = 0.0;

    Index p() const { return alpha.size(); }

    static MediationParams zero(Index p) {
        return {Vec::Zero(p), Vec::Zero(p), 0.0};
    }
};

void validate(const MediationParams& params);

// Effect decomposition: de = gamma, ie_i = alpha_i*beta_i,
// tie = sum(ie), te = de + tie.
struct Effects {
    double de = 0.0;
    Vec ie;
    double tie = 0.0;
    double te = 0.0;
};

}  // namespace medpath
