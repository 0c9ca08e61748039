#include "medpath/screening.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "medpath/core_model.hpp"
#include "medpath/parallel.hpp"

namespace medpath {

void ScreenConfig::validate() const {
    if (k <= 0.0) throw ContractError("screen: scaling factor k must be > 0");
    if (d_override && *d_override < 1)
        throw ContractError("screen: d_override must be >= 1");
}

Index reduced_dim(Index n, double k) {
    if (n < 2) throw ContractError("reduced_dim: n must be >= 2");
    if (k <= 0.0) throw ContractError("reduced_dim: k must be > 0");
    const double d = std::round(k * static_cast<double>(n) / std::log(static_cast<double>(n)));
    return std::max<Index>(1, static_cast<Index>(d));
}

ScreenResult sis_screen(const Dataset& data, const ScreenConfig& cfg, int jobs) {
    validate(data);
    cfg.validate();
    const Index n = data.n(), p = data.p();
    const Index d = cfg.d_override ? *cfg.d_override : reduced_dim(n, cfg.k);
    if (d > p)
        throw ContractError("screen: reduced dimension " + std::to_string(d) +
                            " exceeds mediator count " + std::to_string(p));

    const double y_mean = data.y.mean();
    const Vec yc = data.y.array() - y_mean;
    const double y_ss = yc.squaredNorm();
    if (y_ss == 0.0) throw ContractError("screen: column y has zero variance");

    ScreenResult out;
    out.scores.resize(p);
    parallel_for(static_cast<std::size_t>(p), jobs, [&](std::size_t j) {
        const Index i = static_cast<Index>(j);
        const Vec mc = data.m.col(i).array() - data.m.col(i).mean();
        const double m_ss = mc.squaredNorm();
        if (m_ss == 0.0) {
            out.scores[i] = std::numeric_limits<double>::quiet_NaN();
            return;
        }
        out.scores[i] = std::abs(mc.dot(yc)) / std::sqrt(m_ss * y_ss);
    });
    for (Index i = 0; i < p; ++i)
        if (std::isnan(out.scores[i]))
            throw ContractError("screen: column m" + std::to_string(i + 1) +
                                " has zero variance");

    std::vector<Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        if (out.scores[a] != out.scores[b]) return out.scores[a] > out.scores[b];
        return a < b;
    });

    out.kept_indices.assign(order.begin(), order.begin() + d);
    out.screened.x = data.x;
    out.screened.y = data.y;
    out.screened.m.resize(n, d);
    for (Index j = 0; j < d; ++j)
        out.screened.m.col(j) = data.m.col(out.kept_indices[static_cast<std::size_t>(j)]);
    for (auto& idx : out.kept_indices) idx += 1;  // report 1-based
    return out;
}

}  // namespace medpath
