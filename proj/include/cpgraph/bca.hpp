#pragma once
#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include <cpgraph/corescore.hpp>
#include <cpgraph/glasso.hpp>
#include <cpgraph/model.hpp>
#include <cpgraph/types.hpp>

namespace cpgraph {

struct FitResult {
    Precision theta;
    CoreScores c;
    std::vector<double> objective_trace; // after every half-step: theta, c, theta, c, ...
    int outer_iterations;
    bool converged;
    int glasso_iterations = 0;           // Newton steps summed over all theta-steps
    bool glasso_all_converged = true;
};

/// Optional starting point for fit(). When theta is given, the objective at
/// (theta, c) is the reference for the first convergence test.
struct FitInit {
    const CoreScores* c = nullptr;
    const Precision* theta = nullptr;
};

/// One theta-step: weighted graphical lasso with weights from c.
inline GlassoResult fit_graph_given_scores_cov(const Matrix& S, const CoreScores& c, const DistanceMatrix* dist,
                                               const Hyperparams& hyper, const Precision* warm_start = nullptr)
{
    const WeightMatrix w = compute_weights(c, dist, hyper.e, hyper.eps_w);
    return weighted_glasso(S, w, hyper.lambda, hyper.glasso_tol, hyper.glasso_max_iter, warm_start);
}

inline GlassoResult fit_graph_given_scores(const FeatureMatrix& X, const CoreScores& c, const DistanceMatrix* dist,
                                           const Hyperparams& hyper, const Precision* warm_start = nullptr)
{
    hyper.validate(X.nodes());
    if (c.size() != X.nodes()) throw InputError("core score length does not match the node count");
    return fit_graph_given_scores_cov(empirical_covariance(X, hyper.ridge), c, dist, hyper, warm_start);
}

/// Block coordinate ascent on the joint objective starting from a
/// covariance matrix. Alternates a weighted graphical lasso (theta-step,
/// warm-started) with the core-score LP (c-step) until the relative change of
/// the objective over one outer iteration drops below bca_rel_tol.
inline FitResult fit_covariance(const Matrix& S, const DistanceMatrix* dist, const Hyperparams& hyper,
                                const FitInit& init = {})
{
    const Index n = S.rows();
    hyper.validate(n);
    if (hyper.e > 0.0 && dist == nullptr) throw ConfigError("e > 0 requires a distance matrix");

    const double mass_cap = max_core_mass(n, dist, hyper.e, hyper.eps_w);
    if (hyper.M > mass_cap + 1e-12) {
        std::ostringstream msg;
        msg << "budget M = " << hyper.M << " exceeds the largest feasible core mass " << mass_cap;
        throw ConfigError(msg.str());
    }

    CoreScores c = init.c ? *init.c : CoreScores::uniform(n, hyper.M);
    if (c.size() != n) throw InputError("initial core scores have the wrong length");
    if (std::abs(c.budget() - hyper.M) > CoreScores::kSumTolerance)
        throw ConfigError("initial core scores do not sum to M");

    std::optional<Precision> theta;
    std::optional<double> previous;
    if (init.theta) {
        theta = *init.theta;
        previous = joint_objective(*theta, c, S, hyper, dist);
    }

    const LpOptions lp_opts{hyper.diagonal_gains, 0};
    std::vector<double> trace;
    int glasso_steps = 0;
    bool glasso_ok = true;
    bool converged = false;
    int outer = 0;
    while (outer < hyper.bca_max_iter) {
        ++outer;
        GlassoResult g = fit_graph_given_scores_cov(S, c, dist, hyper, theta ? &*theta : nullptr);
        glasso_steps += g.iterations;
        glasso_ok = glasso_ok && g.converged;
        theta = std::move(g.theta);
        trace.push_back(joint_objective(*theta, c, S, hyper, dist));

        const LpResult lp = core_score_lp(theta->values().cwiseAbs(), dist, hyper.e, hyper.M, hyper.eps_w,
                                          hyper.lp_tol, lp_opts);
        c = lp.c;
        const double current = joint_objective(*theta, c, S, hyper, dist);
        trace.push_back(current);

        if (previous) {
            const double rel = std::abs(current - *previous) / std::max(std::abs(*previous), 1e-12);
            if (rel < hyper.bca_rel_tol) {
                converged = true;
                break;
            }
        }
        previous = current;
    }

    return FitResult{std::move(*theta), std::move(c), std::move(trace), outer, converged, glasso_steps, glasso_ok};
}

/// Joint estimate of a sparse precision matrix and core scores from node
/// attributes. Pure: safe to run concurrently on independent inputs.
inline FitResult fit(const FeatureMatrix& X, const DistanceMatrix* dist, const Hyperparams& hyper,
                     const FitInit& init = {})
{
    hyper.validate(X.nodes());
    if (dist != nullptr && dist->size() != X.nodes())
        throw InputError("distance matrix size does not match the node count");
    return fit_covariance(empirical_covariance(X, hyper.ridge), dist, hyper, init);
}

} // namespace cpgraph
