#include "medpath/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "medpath/core_model.hpp"
#include "medpath/parallel.hpp"

namespace medpath {

std::vector<double> default_lambda_gamma_grid() {
    std::vector<double> values;
    values.reserve(72);
    values.push_back(0.0);
    for (int i = 0; i <= 20; ++i)  // 21 points on [0.001, 0.1]
        values.push_back(std::pow(10.0, -3.0 + 2.0 * i / 20.0));
    for (int i = 1; i <= 50; ++i)  // 50 points on (0.1, 100]
        values.push_back(std::pow(10.0, -1.0 + 3.0 * i / 50.0));
    return values;
}

void GridSpec::validate() const {
    const auto check = [](const std::vector<double>& v, const char* name) {
        if (v.empty()) throw ContractError(std::string("grid: ") + name + " list is empty");
        for (double x : v)
            if (x < 0.0) throw ContractError(std::string("grid: ") + name + " has negative value");
        if (!std::is_sorted(v.begin(), v.end()))
            throw ContractError(std::string("grid: ") + name + " must be sorted ascending");
    };
    check(lambda_alpha_values, "lambda_alpha");
    check(lambda_beta_values, "lambda_beta");
    check(lambda_gamma_values, "lambda_gamma");
    if (gamma_floor < 0.0) throw ContractError("grid: gamma_floor must be >= 0");
}

std::size_t pick_best_index(std::size_t count,
                            const std::function<double(std::size_t)>& bic_of,
                            const std::function<double(std::size_t)>& total_penalty_of,
                            std::vector<std::size_t>* ties) {
    std::size_t best = count;
    double best_bic = std::numeric_limits<double>::infinity();
    double best_total = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < count; ++i) {
        const double b = bic_of(i);
        if (std::isnan(b)) continue;
        if (best == count || b < best_bic ||
            (b == best_bic && total_penalty_of(i) > best_total)) {
            best = i;
            best_bic = b;
            best_total = total_penalty_of(i);
        }
    }
    if (ties) {
        ties->clear();
        if (best != count)
            for (std::size_t i = 0; i < count; ++i)
                if (!std::isnan(bic_of(i)) && bic_of(i) == best_bic) ties->push_back(i);
    }
    return best;
}

namespace {

FitResult failed_result(Index p, const std::string& message) {
    FitResult res;
    res.params = MediationParams::zero(p);
    res.effects = effects(res.params);
    res.bic = std::numeric_limits<double>::quiet_NaN();
    res.objective = std::numeric_limits<double>::quiet_NaN();
    res.error = message;
    return res;
}

}  // namespace

GridSearchResult grid_search(const Dataset& data, const GridSpec& grid,
                             const PenaltyConfig& pen_base, const SolverConfig& cfg,
                             int jobs) {
    grid.validate();
    cfg.validate();
    validate(data);

    const auto& las = grid.lambda_alpha_values;
    const auto& lbs = grid.lambda_beta_values;
    const auto& lgs = grid.lambda_gamma_values;
    const std::size_t na = las.size(), nb = lbs.size(), ng = lgs.size();
    const auto row_index = [&](std::size_t ia, std::size_t ib, std::size_t ig) {
        return (ia * nb + ib) * ng + ig;
    };

    // Strategy mapping of each requested lambda_gamma; invalid requests
    // (zero under MD) become flagged rows rather than aborting the grid.
    PenaltyConfig strat = pen_base;
    strat.strategy = grid.strategy;
    strat.gamma_floor = grid.gamma_floor;
    std::vector<double> eff(ng, std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> eff_error(ng);
    for (std::size_t ig = 0; ig < ng; ++ig) {
        try {
            eff[ig] = effective_lambda_gamma(strat, lgs[ig]);
        } catch (const ContractError& e) {
            eff_error[ig] = e.what();
        }
    }

    // After clamping, several requested values can map to one effective
    // value; solve each distinct value once per chain.
    std::vector<double> distinct;
    for (std::size_t ig = 0; ig < ng; ++ig)
        if (eff_error[ig].empty()) distinct.push_back(eff[ig]);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<std::size_t> slot(ng, ng);
    for (std::size_t ig = 0; ig < ng; ++ig)
        if (eff_error[ig].empty())
            slot[ig] = static_cast<std::size_t>(
                std::lower_bound(distinct.begin(), distinct.end(), eff[ig]) - distinct.begin());

    const auto make_pen = [&](std::size_t ia, std::size_t ib, double lg) {
        PenaltyConfig pen = pen_base;
        pen.lambda_alpha = las[ia];
        pen.lambda_beta = lbs[ib];
        pen.lambda_gamma = lg;
        pen.strategy = grid.strategy;
        pen.gamma_floor = grid.gamma_floor;
        return pen;
    };

    GridSearchResult out;
    out.table.resize(na * nb * ng);

    const SolverContext base_ctx(data);

    if (pen_base.variant == PenaltyVariant::lasso) {
        // The lasso objective separates: the alpha block depends only on
        // lambda_alpha and the (beta, gamma) block only on the pair
        // (lambda_beta, lambda_gamma), so the grid factorizes.
        std::vector<Vec> alpha_cache(na);
        for (std::size_t ia = 0; ia < na; ++ia)
            alpha_cache[ia] = lasso_alpha_exact(data, las[ia]);

        parallel_for(nb, jobs, [&](std::size_t ib) {
            SolverContext ctx = base_ctx;
            for (std::size_t s = 0; s < distinct.size(); ++s) {
                const FitResult chain =
                    ctx.fit(make_pen(0, ib, distinct[s]), cfg, std::nullopt, s > 0);
                for (std::size_t ia = 0; ia < na; ++ia) {
                    for (std::size_t ig = 0; ig < ng; ++ig) {
                        if (slot[ig] != s) continue;
                        const PenaltyConfig pen = make_pen(ia, ib, distinct[s]);
                        MediationParams params{alpha_cache[ia], chain.params.beta,
                                               chain.params.gamma};
                        GridPoint& pt = out.table[row_index(ia, ib, ig)];
                        pt.config = pen;
                        pt.requested_lambda_gamma = lgs[ig];
                        pt.result = make_fit_result(data, pen, cfg, std::move(params),
                                                    chain.iterations, chain.converged);
                    }
                }
            }
        });
    } else {
        parallel_for(na * nb, jobs, [&](std::size_t task) {
            const std::size_t ia = task / nb, ib = task % nb;
            SolverContext ctx = base_ctx;
            for (std::size_t s = 0; s < distinct.size(); ++s) {
                const PenaltyConfig pen = make_pen(ia, ib, distinct[s]);
                const FitResult chain = ctx.fit(pen, cfg, std::nullopt, s > 0);
                for (std::size_t ig = 0; ig < ng; ++ig) {
                    if (slot[ig] != s) continue;
                    GridPoint& pt = out.table[row_index(ia, ib, ig)];
                    pt.config = pen;
                    pt.requested_lambda_gamma = lgs[ig];
                    pt.result = chain;
                }
            }
        });
    }

    for (std::size_t ig = 0; ig < ng; ++ig) {
        if (eff_error[ig].empty()) continue;
        for (std::size_t ia = 0; ia < na; ++ia)
            for (std::size_t ib = 0; ib < nb; ++ib) {
                GridPoint& pt = out.table[row_index(ia, ib, ig)];
                pt.config = make_pen(ia, ib, 0.0);
                pt.requested_lambda_gamma = lgs[ig];
                pt.result = failed_result(data.p(), eff_error[ig]);
            }
    }

    const auto bic_of = [&](std::size_t i) {
        return out.table[i].result.failed() ? std::numeric_limits<double>::quiet_NaN()
                                            : out.table[i].result.bic;
    };
    const auto total_of = [&](std::size_t i) {
        const PenaltyConfig& c = out.table[i].config;
        return c.lambda_alpha + c.lambda_beta + c.lambda_gamma;
    };
    out.best = pick_best_index(out.table.size(), bic_of, total_of, &out.ties);
    if (out.best == out.table.size())
        throw ContractError("grid_search: every grid point failed");
    return out;
}

TwoStageAggregate two_stage_select(const std::vector<std::vector<SampleRow>>& per_sample) {
    if (per_sample.empty()) throw ContractError("two_stage_select: no samples");
    const std::size_t rows = per_sample.front().size();
    for (const auto& sample : per_sample) {
        if (sample.empty()) throw ContractError("two_stage_select: empty sample table");
        if (sample.size() != rows)
            throw ContractError("two_stage_select: samples do not share the config grid");
    }
    for (std::size_t r = 0; r < rows; ++r) {
        const PenaltyConfig& ref = per_sample.front()[r].config;
        for (const auto& sample : per_sample) {
            const PenaltyConfig& c = sample[r].config;
            if (c.lambda_alpha != ref.lambda_alpha || c.lambda_beta != ref.lambda_beta ||
                c.lambda_gamma != ref.lambda_gamma || c.variant != ref.variant)
                throw ContractError("two_stage_select: samples do not share the config grid");
        }
    }

    TwoStageAggregate agg;
    agg.chosen.reserve(per_sample.size());
    double sum_rb_ie = 0.0, sum_rb_de = 0.0;
    std::size_t n_rb_ie = 0, n_rb_de = 0;
    for (const auto& sample : per_sample) {
        const auto bic_of = [&](std::size_t i) {
            return sample[i].fit.failed() ? std::numeric_limits<double>::quiet_NaN()
                                          : sample[i].fit.bic;
        };
        const auto total_of = [&](std::size_t i) {
            const PenaltyConfig& c = sample[i].config;
            return c.lambda_alpha + c.lambda_beta + c.lambda_gamma;
        };
        const std::size_t pick = pick_best_index(sample.size(), bic_of, total_of);
        if (pick == sample.size())
            throw ContractError("two_stage_select: a sample has no usable rows");
        agg.chosen.push_back(pick);

        const SampleRow& row = sample[pick];
        agg.mean_metrics.tpr += row.metrics.tpr;
        agg.mean_metrics.tnr += row.metrics.tnr;
        agg.mean_metrics.tdr += row.metrics.tdr;
        agg.mean_metrics.f1 += row.metrics.f1;
        agg.mean_metrics.youden += row.metrics.youden;
        agg.mean_metrics.mse_alpha += row.metrics.mse_alpha;
        agg.mean_metrics.mse_beta += row.metrics.mse_beta;
        agg.mean_metrics.mse_ie += row.metrics.mse_ie;
        if (row.metrics.rb_ie) {
            sum_rb_ie += *row.metrics.rb_ie;
            ++n_rb_ie;
        }
        if (row.metrics.rb_de) {
            sum_rb_de += *row.metrics.rb_de;
            ++n_rb_de;
        }
        agg.mean_de += row.fit.effects.de;
        agg.mean_tie += row.fit.effects.tie;
        agg.mean_te += row.fit.effects.te;
        agg.mean_bic += row.fit.bic;
        agg.mean_q += row.fit.q;
    }
    const double ns = static_cast<double>(per_sample.size());
    agg.mean_metrics.tpr /= ns;
    agg.mean_metrics.tnr /= ns;
    agg.mean_metrics.tdr /= ns;
    agg.mean_metrics.f1 /= ns;
    agg.mean_metrics.youden /= ns;
    agg.mean_metrics.mse_alpha /= ns;
    agg.mean_metrics.mse_beta /= ns;
    agg.mean_metrics.mse_ie /= ns;
    if (n_rb_ie > 0) agg.mean_metrics.rb_ie = sum_rb_ie / static_cast<double>(n_rb_ie);
    if (n_rb_de > 0) agg.mean_metrics.rb_de = sum_rb_de / static_cast<double>(n_rb_de);
    agg.mean_de /= ns;
    agg.mean_tie /= ns;
    agg.mean_te /= ns;
    agg.mean_bic /= ns;
    agg.mean_q /= ns;
    return agg;
}

}  // namespace medpath
