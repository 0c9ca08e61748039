#include "medpath/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "medpath/core_model.hpp"
#include "medpath/selection.hpp"

namespace medpath {

void SolverConfig::validate() const {
    if (max_iter < 1) throw ContractError("solver: max_iter must be >= 1");
    if (tol_primal <= 0 || tol_dual <= 0) throw ContractError("solver: tolerances must be > 0");
    if (rho <= 0) throw ContractError("solver: rho must be > 0");
    if (nonzero_tol <= 0) throw ContractError("solver: nonzero_tol must be > 0");
}

FitResult make_fit_result(const Dataset& data, const PenaltyConfig& pen,
                          const SolverConfig& cfg, MediationParams params,
                          int iterations, bool converged) {
    FitResult res;
    res.effects = effects(params);
    res.objective = objective(pen, params, data);
    res.iterations = iterations;
    res.converged = converged;
    const Index p = params.p();
    res.support_alpha.resize(static_cast<std::size_t>(p));
    res.support_beta.resize(static_cast<std::size_t>(p));
    int q = 0;
    for (Index i = 0; i < p; ++i) {
        const bool sa = std::abs(params.alpha[i]) > cfg.nonzero_tol;
        const bool sb = std::abs(params.beta[i]) > cfg.nonzero_tol;
        res.support_alpha[static_cast<std::size_t>(i)] = sa;
        res.support_beta[static_cast<std::size_t>(i)] = sb;
        q += sa + sb;
    }
    q += std::abs(params.gamma) > cfg.nonzero_tol ? 1 : 0;
    res.q = q;
    res.bic = bic(loglik(params, data), q, data.n());
    res.params = std::move(params);
    return res;
}

Vec lasso_alpha_exact(const Dataset& data, double lambda_alpha) {
    if (lambda_alpha < 0.0) throw ContractError("lasso_alpha_exact: lambda_alpha < 0");
    const double xtx = data.x.squaredNorm();
    if (xtx == 0.0)
        throw ContractError("lasso_alpha_exact: rank-deficient design, exposure column of "
                            "[x m] is identically zero so the alpha subproblem has no ridge");
    Vec alpha = data.m.transpose() * data.x;
    for (Index i = 0; i < alpha.size(); ++i) alpha[i] = prox_l1(alpha[i], lambda_alpha) / xtx;
    return alpha;
}

SolverContext::SolverContext(const Dataset& data) : data_(&data) {
    medpath::validate(data);
    p_ = data.p();
    xtx_ = data.x.squaredNorm();
    yty_ = data.y.squaredNorm();
    mtm_fro_ = data.m.squaredNorm();
    xtm_ = data.m.transpose() * data.x;
    wty_.resize(p_ + 1);
    wty_.head(p_) = data.m.transpose() * data.y;
    wty_[p_] = data.x.dot(data.y);

    // Gram matrix of W = [M x]; eigendecomposition makes the ridge solve
    // (W'W + rho I)^-1 cheap for any rho, so rho adaptation is free.
    Mat gram(p_ + 1, p_ + 1);
    gram.topLeftCorner(p_, p_).noalias() = data.m.transpose() * data.m;
    gram.topRightCorner(p_, 1) = xtm_;
    gram.bottomLeftCorner(1, p_) = xtm_.transpose();
    gram(p_, p_) = xtx_;
    Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
    evec_ = eig.eigenvectors();
    eval_ = eig.eigenvalues().cwiseMax(0.0);
}

namespace {

struct StopRule {
    double tol_primal, tol_dual;
    double sqrt_dim;

    bool converged(double r_norm, double s_norm, double theta_norm, double z_norm,
                   double rho, double u_norm) const {
        const double eps_pri = sqrt_dim * tol_primal + tol_primal * std::max(theta_norm, z_norm);
        const double eps_dua = sqrt_dim * tol_dual + tol_dual * rho * u_norm;
        return r_norm <= eps_pri && s_norm <= eps_dua;
    }
};

// Residual balancing: keep ||r|| and ||s|| within a factor of 10 by
// doubling/halving rho, rescaling the scaled dual variable accordingly.
template <typename Rescale>
void balance_rho(double r_norm, double s_norm, double& rho, Rescale&& rescale_u) {
    if (r_norm > 10.0 * s_norm && rho < 1e12) {
        rho *= 2.0;
        rescale_u(0.5);
    } else if (s_norm > 10.0 * r_norm && rho > 1e-8) {
        rho *= 0.5;
        rescale_u(2.0);
    }
}

}  // namespace

FitResult SolverContext::fit(const PenaltyConfig& pen, const SolverConfig& cfg,
                             const std::optional<MediationParams>& init, bool warm) {
    pen.validate();
    cfg.validate();
    if (init && init->p() != p_)
        throw ContractError("fit: init dimension " + std::to_string(init->p()) +
                            " does not match p = " + std::to_string(p_));
    if (xtx_ == 0.0)
        throw ContractError("fit: rank-deficient design, exposure column of [x m] is "
                            "identically zero so the alpha subproblem has no ridge");
    if (warm && (!has_state_ || state_variant_ != pen.variant)) warm = false;
    if (pen.variant == PenaltyVariant::lasso) return fit_lasso(pen, cfg, init, warm);
    return fit_pathway(pen, cfg, init, warm);
}

FitResult SolverContext::fit_lasso(const PenaltyConfig& pen, const SolverConfig& cfg,
                                   const std::optional<MediationParams>& init, bool warm) {
    // The alpha block separates: per mediator a scalar least squares with
    // an L1 term, minimized exactly by a soft threshold.
    Vec alpha(p_);
    for (Index i = 0; i < p_; ++i) alpha[i] = prox_l1(xtm_[i], pen.lambda_alpha) / xtx_;
    const double alpha_base =
        0.5 * (mtm_fro_ - 2.0 * alpha.dot(xtm_) + xtx_ * alpha.squaredNorm()) +
        pen.lambda_alpha * alpha.lpNorm<1>();

    const Index dim = p_ + 1;
    double rho = cfg.rho;
    Vec z, u;
    if (warm) {
        z = z_bg_;
        u = u_bg_;
        rho = state_rho_;
    } else {
        z = Vec::Zero(dim);
        if (init) {
            z.head(p_) = init->beta;
            z[p_] = init->gamma;
        }
        u = Vec::Zero(dim);
    }

    Vec pen_weights = Vec::Constant(dim, pen.lambda_beta);
    pen_weights[p_] = pen.lambda_gamma;

    const auto outcome_sq = [&](const Vec& v, const Vec& vt) {
        // ||y - W v||^2 through the eigenbasis of W'W
        return std::max(0.0, yty_ - 2.0 * v.dot(wty_) + vt.dot(eval_.cwiseProduct(vt)));
    };
    const auto objective_at = [&](const Vec& v, const Vec& vt) {
        return alpha_base + 0.5 * outcome_sq(v, vt) +
               pen.lambda_beta * v.head(p_).lpNorm<1>() +
               pen.lambda_gamma * std::abs(v[p_]);
    };

    Vec t = evec_.transpose() * z;
    double best_obj = objective_at(z, t);
    Vec best_z = z;

    std::vector<double> trace;
    if (cfg.record_trace) trace.push_back(best_obj);

    const StopRule stop{cfg.tol_primal, cfg.tol_dual, std::sqrt(static_cast<double>(dim))};
    Vec rhs(dim), theta(dim), z_prev(dim), w(dim);
    int iterations = 0;
    bool converged = false;

    for (int k = 1; k <= cfg.max_iter; ++k) {
        iterations = k;
        rhs = wty_ + rho * (z - u);
        t.noalias() = evec_.transpose() * rhs;
        t.array() /= (eval_.array() + rho);
        theta.noalias() = evec_ * t;

        z_prev = z;
        w = theta + u;
        for (Index j = 0; j < dim; ++j) z[j] = prox_l1(w[j], pen_weights[j] / rho);
        u += theta - z;

        const double r_norm = (theta - z).norm();
        const double s_norm = rho * (z - z_prev).norm();

        t.noalias() = evec_.transpose() * z;
        const double obj = objective_at(z, t);
        if (obj <= best_obj) {
            best_obj = obj;
            best_z = z;
        }
        if (cfg.record_trace) trace.push_back(best_obj);

        if (stop.converged(r_norm, s_norm, theta.norm(), z.norm(), rho, u.norm())) {
            converged = true;
            break;
        }
        balance_rho(r_norm, s_norm, rho, [&](double f) { u *= f; });
    }

    has_state_ = true;
    state_variant_ = PenaltyVariant::lasso;
    state_rho_ = rho;
    z_bg_ = z;
    u_bg_ = u;

    MediationParams params{std::move(alpha), best_z.head(p_), best_z[p_]};
    FitResult out = make_fit_result(*data_, pen, cfg, std::move(params), iterations, converged);
    out.objective_trace = std::move(trace);
    return out;
}

FitResult SolverContext::fit_pathway(const PenaltyConfig& pen, const SolverConfig& cfg,
                                     const std::optional<MediationParams>& init, bool warm) {
    const Index dim_bg = p_ + 1;
    const double full_dim = static_cast<double>(p_ + dim_bg);
    double rho = cfg.rho;
    Vec za, ua, zbg, ubg;
    if (warm && z_a_.size() == p_) {
        za = z_a_;
        ua = u_a_;
        zbg = z_bg_;
        ubg = u_bg_;
        rho = state_rho_;
    } else {
        za = Vec::Zero(p_);
        zbg = Vec::Zero(dim_bg);
        if (init) {
            za = init->alpha;
            zbg.head(p_) = init->beta;
            zbg[p_] = init->gamma;
        }
        ua = Vec::Zero(p_);
        ubg = Vec::Zero(dim_bg);
    }

    const auto mediator_sq = [&](const Vec& a) {
        return std::max(0.0, mtm_fro_ - 2.0 * a.dot(xtm_) + xtx_ * a.squaredNorm());
    };
    const auto outcome_sq = [&](const Vec& v, const Vec& vt) {
        return std::max(0.0, yty_ - 2.0 * v.dot(wty_) + vt.dot(eval_.cwiseProduct(vt)));
    };
    const auto objective_at = [&](const Vec& a, const Vec& v, const Vec& vt) {
        double pen_val = pen.lambda_alpha * a.lpNorm<1>() +
                         pen.lambda_beta * v.head(p_).lpNorm<1>() +
                         pen.lambda_gamma * std::abs(v[p_]);
        const auto aa = a.array();
        const auto bb = v.head(p_).array();
        pen_val += pen.kappa * ((aa * bb).abs() + pen.nu * (aa.square() + bb.square())).sum();
        return 0.5 * (mediator_sq(a) + outcome_sq(v, vt)) + pen_val;
    };

    Vec t = evec_.transpose() * zbg;
    double best_obj = objective_at(za, zbg, t);
    Vec best_za = za, best_zbg = zbg;

    std::vector<double> trace;
    if (cfg.record_trace) trace.push_back(best_obj);

    const StopRule stop{cfg.tol_primal, cfg.tol_dual, std::sqrt(full_dim)};
    Vec theta_a(p_), rhs(dim_bg), theta_bg(dim_bg), za_prev(p_), zbg_prev(dim_bg);
    int iterations = 0;
    bool converged = false;

    for (int k = 1; k <= cfg.max_iter; ++k) {
        iterations = k;
        theta_a = (xtm_ + rho * (za - ua)) / (xtx_ + rho);
        rhs = wty_ + rho * (zbg - ubg);
        t.noalias() = evec_.transpose() * rhs;
        t.array() /= (eval_.array() + rho);
        theta_bg.noalias() = evec_ * t;

        za_prev = za;
        zbg_prev = zbg;
        const double step = 1.0 / rho;
        for (Index i = 0; i < p_; ++i) {
            const auto [zx, zy] =
                prox_pathway_pair(theta_a[i] + ua[i], theta_bg[i] + ubg[i], step,
                                  pen.kappa, pen.nu, pen.lambda_alpha, pen.lambda_beta);
            za[i] = zx;
            zbg[i] = zy;
        }
        zbg[p_] = prox_l1(theta_bg[p_] + ubg[p_], pen.lambda_gamma / rho);

        ua += theta_a - za;
        ubg += theta_bg - zbg;

        const double r_norm = std::sqrt((theta_a - za).squaredNorm() +
                                        (theta_bg - zbg).squaredNorm());
        const double s_norm = rho * std::sqrt((za - za_prev).squaredNorm() +
                                              (zbg - zbg_prev).squaredNorm());

        t.noalias() = evec_.transpose() * zbg;
        const double obj = objective_at(za, zbg, t);
        if (obj <= best_obj) {
            best_obj = obj;
            best_za = za;
            best_zbg = zbg;
        }
        if (cfg.record_trace) trace.push_back(best_obj);

        const double theta_norm = std::sqrt(theta_a.squaredNorm() + theta_bg.squaredNorm());
        const double z_norm = std::sqrt(za.squaredNorm() + zbg.squaredNorm());
        const double u_norm = std::sqrt(ua.squaredNorm() + ubg.squaredNorm());
        if (stop.converged(r_norm, s_norm, theta_norm, z_norm, rho, u_norm)) {
            converged = true;
            break;
        }
        balance_rho(r_norm, s_norm, rho, [&](double f) {
            ua *= f;
            ubg *= f;
        });
    }

    has_state_ = true;
    state_variant_ = PenaltyVariant::pathway;
    state_rho_ = rho;
    z_a_ = za;
    u_a_ = ua;
    z_bg_ = zbg;
    u_bg_ = ubg;

    MediationParams params{std::move(best_za), best_zbg.head(p_), best_zbg[p_]};
    FitResult out = make_fit_result(*data_, pen, cfg, std::move(params), iterations, converged);
    out.objective_trace = std::move(trace);
    return out;
}

FitResult fit(const Dataset& data, const PenaltyConfig& pen, const SolverConfig& cfg,
              const std::optional<MediationParams>& init) {
    SolverContext ctx(data);
    return ctx.fit(pen, cfg, init);
}

std::vector<FitResult> fit_path(const Dataset& data, const std::vector<PenaltyConfig>& pens,
                                const SolverConfig& cfg) {
    if (pens.empty()) throw ContractError("fit_path: empty config list");
    for (const auto& pen : pens)
        if (pen.variant != pens.front().variant)
            throw ContractError("fit_path: all configs must share the penalty variant");

    SolverContext ctx(data);
    std::vector<FitResult> results;
    results.reserve(pens.size());
    bool warm = false;
    for (const auto& pen : pens) {
        try {
            results.push_back(ctx.fit(pen, cfg, std::nullopt, warm));
            warm = true;
        } catch (const ContractError& e) {
            FitResult failed;
            failed.params = MediationParams::zero(data.p());
            failed.effects = effects(failed.params);
            failed.error = e.what();
            results.push_back(std::move(failed));
            ctx.reset_chain();
            warm = false;
        }
    }
    return results;
}

}  // namespace medpath
