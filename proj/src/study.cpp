#include "medpath/study.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "medpath/core_model.hpp"
#include "medpath/io.hpp"
#include "medpath/parallel.hpp"
#include "medpath/screening.hpp"

namespace medpath {

void MethodSpec::validate() const {
    if (name.empty()) throw ContractError("method: name must not be empty");
    if (variant == PenaltyVariant::pathway && nu < 0.5)
        throw ContractError("method " + name + ": nu >= 0.5 required");
    if (kappa < 0.0 || gamma_floor < 0.0)
        throw ContractError("method " + name + ": negative tuning parameter");
    if (pair_rule == PairRule::explicit_list && pairs.empty())
        throw ContractError("method " + name + ": explicit pair list is empty");
}

std::vector<std::pair<double, double>> MethodSpec::resolve_pairs(const GridSpec& grid) const {
    std::vector<std::pair<double, double>> out;
    switch (pair_rule) {
        case PairRule::all:
            for (double la : grid.lambda_alpha_values)
                for (double lb : grid.lambda_beta_values) out.emplace_back(la, lb);
            break;
        case PairRule::equal:
            for (double la : grid.lambda_alpha_values)
                for (double lb : grid.lambda_beta_values)
                    if (la == lb) out.emplace_back(la, lb);
            break;
        case PairRule::asym:
            for (double la : grid.lambda_alpha_values)
                for (double lb : grid.lambda_beta_values)
                    if (la > lb) out.emplace_back(la, lb);
            break;
        case PairRule::explicit_list:
            out = pairs;
            break;
    }
    if (out.empty())
        throw ContractError("method " + name + ": pair rule selects no grid pairs");
    return out;
}

void StudyConfig::validate() const {
    scenario.validate();
    if (replicates < 1) throw ContractError("study: replicates must be >= 1");
    if (methods.empty()) throw ContractError("study: at least one method required");
    for (const auto& m : methods) m.validate();
    grid.validate();
    solver.validate();
    for (double k : k_values)
        if (k <= 0.0) throw ContractError("study: k values must be > 0");
    for (Index p : p_values)
        if (p < 1) throw ContractError("study: p values must be >= 1");
}

namespace {

// Expands a fit on the screened space back to full-p coordinates
// (screened-out mediators are exact zeros).
MediationParams expand_params(const MediationParams& reduced,
                              const std::vector<Index>& kept_1based, Index p_full) {
    MediationParams full = MediationParams::zero(p_full);
    full.gamma = reduced.gamma;
    for (std::size_t j = 0; j < kept_1based.size(); ++j) {
        const Index idx = kept_1based[j] - 1;
        full.alpha[idx] = reduced.alpha[static_cast<Index>(j)];
        full.beta[idx] = reduced.beta[static_cast<Index>(j)];
    }
    return full;
}

struct BestPick {
    PenaltyConfig config;
    double requested_lambda_gamma = 0.0;
    FitResult fit;
};

// Grid search restricted to an explicit pair list, sharing the dataset
// factorization across pairs and warm-starting along the lambda_gamma
// axis; identical selection rule to grid_search.
BestPick search_pairs(const SolverContext& base_ctx, const Dataset& data,
                      const std::vector<std::pair<double, double>>& pair_list,
                      const std::vector<double>& lg_values, const MethodSpec& method,
                      const SolverConfig& scfg) {
    PenaltyConfig strat;
    strat.variant = method.variant;
    strat.kappa = method.kappa;
    strat.nu = method.nu;
    strat.strategy = method.strategy;
    strat.gamma_floor = method.gamma_floor;

    std::vector<double> distinct;
    for (double lg : lg_values) {
        try {
            distinct.push_back(effective_lambda_gamma(strat, lg));
        } catch (const ContractError&) {
            // zero under MD: simply not a usable grid point here
        }
    }
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.empty())
        throw ContractError("method " + method.name + ": no usable lambda_gamma values");

    // distinct lambda_beta chains suffice for the separable lasso block
    const bool is_lasso = method.variant == PenaltyVariant::lasso;
    std::vector<GridPoint> rows;

    const auto run_chain = [&](double la, double lb, auto&& per_fit) {
        SolverContext ctx = base_ctx;
        for (std::size_t s = 0; s < distinct.size(); ++s) {
            PenaltyConfig pen = strat;
            pen.lambda_alpha = la;
            pen.lambda_beta = lb;
            pen.lambda_gamma = distinct[s];
            per_fit(pen, ctx.fit(pen, scfg, std::nullopt, s > 0));
        }
    };

    if (is_lasso) {
        std::vector<double> lbs;
        for (const auto& [la, lb] : pair_list) lbs.push_back(lb);
        std::sort(lbs.begin(), lbs.end());
        lbs.erase(std::unique(lbs.begin(), lbs.end()), lbs.end());

        std::map<double, Vec> alpha_cache;
        for (const auto& pr : pair_list)
            if (!alpha_cache.count(pr.first))
                alpha_cache[pr.first] = lasso_alpha_exact(data, pr.first);

        for (double lb : lbs) {
            run_chain(pair_list.front().first, lb, [&](const PenaltyConfig& pen,
                                                       const FitResult& chain) {
                for (const auto& [pla, plb] : pair_list) {
                    if (plb != lb) continue;
                    PenaltyConfig combo = pen;
                    combo.lambda_alpha = pla;
                    MediationParams params{alpha_cache.at(pla), chain.params.beta,
                                           chain.params.gamma};
                    rows.push_back({combo, pen.lambda_gamma,
                                    make_fit_result(data, combo, scfg, std::move(params),
                                                    chain.iterations, chain.converged)});
                }
            });
        }
    } else {
        for (const auto& [la, lb] : pair_list)
            run_chain(la, lb, [&](const PenaltyConfig& pen, const FitResult& fr) {
                rows.push_back({pen, pen.lambda_gamma, fr});
            });
    }

    const auto bic_of = [&](std::size_t i) {
        return rows[i].result.failed() ? std::numeric_limits<double>::quiet_NaN()
                                       : rows[i].result.bic;
    };
    const auto total_of = [&](std::size_t i) {
        const PenaltyConfig& c = rows[i].config;
        return c.lambda_alpha + c.lambda_beta + c.lambda_gamma;
    };
    const std::size_t best = pick_best_index(rows.size(), bic_of, total_of);
    if (best == rows.size())
        throw ContractError("method " + method.name + ": every grid point failed");
    return {rows[best].config, rows[best].requested_lambda_gamma, rows[best].result};
}

}  // namespace

StudyResult run_study(const StudyConfig& cfg, int jobs) {
    cfg.validate();
    const std::vector<Index> ps = cfg.p_values.empty()
                                      ? std::vector<Index>{cfg.scenario.p}
                                      : cfg.p_values;
    const std::vector<double> ks =
        cfg.k_values.empty() ? std::vector<double>{0.0} : cfg.k_values;
    const std::size_t n_methods = cfg.methods.size();
    const std::size_t cells_per_task = ks.size() * n_methods;
    const std::size_t n_tasks = ps.size() * static_cast<std::size_t>(cfg.replicates);

    StudyResult result;
    result.outcomes.resize(n_tasks * cells_per_task);

    parallel_for(n_tasks, jobs, [&](std::size_t task) {
        const std::size_t ip = task / static_cast<std::size_t>(cfg.replicates);
        const int rep = static_cast<int>(task % static_cast<std::size_t>(cfg.replicates));

        Scenario sc = cfg.scenario;
        sc.p = ps[ip];
        sc.seed = cfg.seed + static_cast<std::uint64_t>(rep);
        const auto [data, truth] = generate(sc);

        for (std::size_t ik = 0; ik < ks.size(); ++ik) {
            const double k = ks[ik];

            // screen once per k, shared by the methods
            Dataset work = data;
            std::vector<Index> kept;
            std::string screen_error;
            if (k > 0.0) {
                try {
                    ScreenConfig scfg;
                    scfg.k = k;
                    const Index d = std::min<Index>(reduced_dim(data.n(), k), data.p());
                    scfg.d_override = d;
                    ScreenResult sr = sis_screen(data, scfg, 1);
                    work = std::move(sr.screened);
                    kept = std::move(sr.kept_indices);
                } catch (const std::exception& e) {
                    screen_error = e.what();
                }
            }

            std::optional<SolverContext> ctx;
            if (screen_error.empty()) ctx.emplace(work);

            for (std::size_t im = 0; im < n_methods; ++im) {
                const MethodSpec& method = cfg.methods[im];
                ReplicateOutcome out;
                out.method = method.name;
                out.p = sc.p;
                out.k = k;
                out.replicate = rep;
                if (!screen_error.empty()) {
                    out.error = screen_error;
                } else {
                    try {
                        const BestPick pick =
                            search_pairs(*ctx, work, method.resolve_pairs(cfg.grid),
                                         cfg.grid.lambda_gamma_values, method, cfg.solver);
                        out.chosen_config = pick.config;
                        out.requested_lambda_gamma = pick.requested_lambda_gamma;
                        out.fit = pick.fit;
                        const MediationParams est =
                            kept.empty() ? pick.fit.params
                                         : expand_params(pick.fit.params, kept, sc.p);
                        out.metrics = evaluate_against_truth(est, truth.params,
                                                             cfg.solver.nonzero_tol);
                    } catch (const std::exception& e) {
                        out.error = e.what();
                    }
                }
                result.outcomes[(task * ks.size() + ik) * n_methods + im] = std::move(out);
            }
        }
    });

    // aggregate per (method, p, k) over successful replicates
    std::map<std::tuple<std::string, Index, double>, std::vector<const ReplicateOutcome*>> groups;
    for (const auto& out : result.outcomes)
        groups[{out.method, out.p, out.k}].push_back(&out);

    for (auto& [key, cells] : groups) {
        StudyAggregate agg;
        agg.method = std::get<0>(key);
        agg.p = std::get<1>(key);
        agg.k = std::get<2>(key);
        double sum_rb_ie = 0.0, sum_rb_de = 0.0;
        std::size_t n_rb_ie = 0, n_rb_de = 0;
        int n_converged = 0;
        for (const ReplicateOutcome* cell : cells) {
            if (!cell->error.empty()) continue;
            ++agg.n_replicates;
            agg.mean_metrics.tpr += cell->metrics.tpr;
            agg.mean_metrics.tnr += cell->metrics.tnr;
            agg.mean_metrics.tdr += cell->metrics.tdr;
            agg.mean_metrics.f1 += cell->metrics.f1;
            agg.mean_metrics.youden += cell->metrics.youden;
            agg.mean_metrics.mse_alpha += cell->metrics.mse_alpha;
            agg.mean_metrics.mse_beta += cell->metrics.mse_beta;
            agg.mean_metrics.mse_ie += cell->metrics.mse_ie;
            if (cell->metrics.rb_ie) {
                sum_rb_ie += *cell->metrics.rb_ie;
                ++n_rb_ie;
            }
            if (cell->metrics.rb_de) {
                sum_rb_de += *cell->metrics.rb_de;
                ++n_rb_de;
            }
            agg.mean_de += cell->fit.effects.de;
            agg.mean_tie += cell->fit.effects.tie;
            agg.mean_te += cell->fit.effects.te;
            agg.mean_bic += cell->fit.bic;
            agg.mean_q += cell->fit.q;
            n_converged += cell->fit.converged ? 1 : 0;
        }
        if (agg.n_replicates > 0) {
            const double ns = agg.n_replicates;
            agg.mean_metrics.tpr /= ns;
            agg.mean_metrics.tnr /= ns;
            agg.mean_metrics.tdr /= ns;
            agg.mean_metrics.f1 /= ns;
            agg.mean_metrics.youden /= ns;
            agg.mean_metrics.mse_alpha /= ns;
            agg.mean_metrics.mse_beta /= ns;
            agg.mean_metrics.mse_ie /= ns;
            if (n_rb_ie > 0) agg.mean_metrics.rb_ie = sum_rb_ie / n_rb_ie;
            if (n_rb_de > 0) agg.mean_metrics.rb_de = sum_rb_de / n_rb_de;
            agg.mean_de /= ns;
            agg.mean_tie /= ns;
            agg.mean_te /= ns;
            agg.mean_bic /= ns;
            agg.mean_q /= ns;
            agg.frac_converged = static_cast<double>(n_converged) / ns;
        }
        result.aggregates.push_back(std::move(agg));
    }
    return result;
}

namespace {

std::string opt_cell(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string{};
}

}  // namespace

std::string long_csv(const StudyResult& result) {
    std::string out = "method,p,k,replicate,metric,value\n";
    const auto row = [&](const ReplicateOutcome& o, const char* metric, double value) {
        out += o.method + "," + std::to_string(o.p) + "," + format_double(o.k) + "," +
               std::to_string(o.replicate) + "," + metric + "," + format_double(value) + "\n";
    };
    for (const auto& o : result.outcomes) {
        if (!o.error.empty()) continue;
        row(o, "tpr", o.metrics.tpr);
        row(o, "tnr", o.metrics.tnr);
        row(o, "tdr", o.metrics.tdr);
        row(o, "f1", o.metrics.f1);
        row(o, "youden", o.metrics.youden);
        row(o, "mse_alpha", o.metrics.mse_alpha);
        row(o, "mse_beta", o.metrics.mse_beta);
        row(o, "mse_ie", o.metrics.mse_ie);
        if (o.metrics.rb_ie) row(o, "rb_ie", *o.metrics.rb_ie);
        if (o.metrics.rb_de) row(o, "rb_de", *o.metrics.rb_de);
        row(o, "de", o.fit.effects.de);
        row(o, "tie", o.fit.effects.tie);
        row(o, "te", o.fit.effects.te);
        row(o, "bic", o.fit.bic);
        row(o, "q", o.fit.q);
        row(o, "converged", o.fit.converged ? 1.0 : 0.0);
        row(o, "lambda_alpha", o.chosen_config.lambda_alpha);
        row(o, "lambda_beta", o.chosen_config.lambda_beta);
        row(o, "lambda_gamma", o.chosen_config.lambda_gamma);
    }
    return out;
}

namespace {

std::string pair_rule_name(MethodSpec::PairRule rule) {
    switch (rule) {
        case MethodSpec::PairRule::all: return "all";
        case MethodSpec::PairRule::equal: return "equal";
        case MethodSpec::PairRule::asym: return "asym";
        default: return "explicit";
    }
}

Json method_to_json(const MethodSpec& m) {
    Json j{{"name", m.name},
           {"variant", to_string(m.variant)},
           {"strategy", to_string(m.strategy)},
           {"gamma_floor", m.gamma_floor},
           {"kappa", m.kappa},
           {"nu", m.nu}};
    if (m.pair_rule == MethodSpec::PairRule::explicit_list) {
        Json pairs = Json::array();
        for (const auto& [la, lb] : m.pairs) pairs.push_back(Json::array({la, lb}));
        j["pairs"] = pairs;
    } else {
        j["pairs"] = pair_rule_name(m.pair_rule);
    }
    return j;
}

MethodSpec method_from_json(const Json& j) {
    MethodSpec m;
    if (!j.contains("name")) throw ContractError("study method: missing 'name'");
    m.name = j["name"].get<std::string>();
    m.variant = penalty_variant_from_string(j.value("variant", std::string("lasso")));
    m.strategy = gamma_strategy_from_string(j.value("strategy", std::string("TR")));
    m.gamma_floor = j.value("gamma_floor", 0.0);
    m.kappa = j.value("kappa", 0.0);
    m.nu = j.value("nu", 2.0);
    if (j.contains("pairs")) {
        const Json& pj = j["pairs"];
        if (pj.is_string()) {
            const std::string rule = pj.get<std::string>();
            if (rule == "all") m.pair_rule = MethodSpec::PairRule::all;
            else if (rule == "equal") m.pair_rule = MethodSpec::PairRule::equal;
            else if (rule == "asym") m.pair_rule = MethodSpec::PairRule::asym;
            else throw ContractError("study method " + m.name + ": unknown pair rule '" +
                                     rule + "' (expected all|equal|asym or a pair array)");
        } else if (pj.is_array()) {
            m.pair_rule = MethodSpec::PairRule::explicit_list;
            for (const auto& pr : pj) {
                if (!pr.is_array() || pr.size() != 2)
                    throw ContractError("study method " + m.name +
                                        ": pairs must be [lambda_alpha, lambda_beta] arrays");
                m.pairs.emplace_back(pr[0].get<double>(), pr[1].get<double>());
            }
        } else {
            throw ContractError("study method " + m.name + ": bad 'pairs' value");
        }
    }
    m.validate();
    return m;
}

}  // namespace

Json to_json(const StudyConfig& cfg) {
    Json methods = Json::array();
    for (const auto& m : cfg.methods) methods.push_back(method_to_json(m));
    Json j{{"scenario", to_json(cfg.scenario)},
           {"replicates", cfg.replicates},
           {"methods", methods},
           {"grid", to_json(cfg.grid)},
           {"solver", to_json(cfg.solver)},
           {"seed", cfg.seed}};
    if (!cfg.p_values.empty()) j["p_values"] = cfg.p_values;
    if (!cfg.k_values.empty()) j["k_values"] = cfg.k_values;
    return j;
}

StudyConfig study_config_from_json(const Json& j) {
    StudyConfig cfg;
    if (j.contains("scenario")) cfg.scenario = scenario_from_json(j["scenario"]);
    cfg.replicates = j.value("replicates", cfg.replicates);
    if (!j.contains("methods") || !j["methods"].is_array() || j["methods"].empty())
        throw ContractError("study: 'methods' must be a non-empty array");
    for (const auto& mj : j["methods"]) cfg.methods.push_back(method_from_json(mj));
    if (j.contains("grid")) cfg.grid = grid_spec_from_json(j["grid"]);
    if (j.contains("solver")) cfg.solver = solver_config_from_json(j["solver"]);
    if (j.contains("p_values")) cfg.p_values = j["p_values"].get<std::vector<Index>>();
    if (j.contains("k_values")) cfg.k_values = j["k_values"].get<std::vector<double>>();
    cfg.seed = j.value("seed", cfg.seed);
    cfg.validate();
    return cfg;
}

std::string aggregate_csv(const StudyResult& result) {
    std::string out =
        "method,p,k,replicates,tpr,tnr,tdr,f1,youden,mse_alpha,mse_beta,mse_ie,"
        "rb_ie,rb_de,de,tie,te,bic,q,frac_converged\n";
    for (const auto& a : result.aggregates) {
        out += a.method + "," + std::to_string(a.p) + "," + format_double(a.k) + "," +
               std::to_string(a.n_replicates) + "," + format_double(a.mean_metrics.tpr) + "," +
               format_double(a.mean_metrics.tnr) + "," + format_double(a.mean_metrics.tdr) +
               "," + format_double(a.mean_metrics.f1) + "," +
               format_double(a.mean_metrics.youden) + "," +
               format_double(a.mean_metrics.mse_alpha) + "," +
               format_double(a.mean_metrics.mse_beta) + "," +
               format_double(a.mean_metrics.mse_ie) + "," + opt_cell(a.mean_metrics.rb_ie) +
               "," + opt_cell(a.mean_metrics.rb_de) + "," + format_double(a.mean_de) + "," +
               format_double(a.mean_tie) + "," + format_double(a.mean_te) + "," +
               format_double(a.mean_bic) + "," + format_double(a.mean_q) + "," +
               format_double(a.frac_converged) + "\n";
    }
    return out;
}

}  // namespace medpath
