#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>

#include <cpgraph/model.hpp>
#include <cpgraph/random.hpp>
#include <cpgraph/types.hpp>

namespace cpgraph {

struct SyntheticInstance {
    CoreScores c_true;
    Precision theta_true;
    FeatureMatrix X;
    std::optional<DistanceMatrix> dist;
    std::uint64_t seed;
};

struct Coordinates {
    Matrix points; // N x 2
    DistanceMatrix dist;
};

/// Uniform points in the unit square and their Euclidean distances. A point
/// coinciding with an earlier one is redrawn.
inline Coordinates sample_coordinates(Index n, std::uint64_t seed)
{
    if (n < 2) throw ConfigError("sample_coordinates needs at least two points");
    Rng rng(seed);
    Matrix p(n, 2);
    for (Index i = 0; i < n; ++i) {
        for (;;) {
            p(i, 0) = rng.uniform();
            p(i, 1) = rng.uniform();
            bool clash = false;
            for (Index k = 0; k < i && !clash; ++k) clash = (p.row(i) - p.row(k)).norm() == 0.0;
            if (!clash) break;
        }
    }
    Matrix d = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < j; ++i) d(i, j) = d(j, i) = (p.row(i) - p.row(j)).norm();
    return Coordinates{std::move(p), DistanceMatrix(std::move(d))};
}

/// Two-level planted core scores: `core_count` nodes at `core_value`, the
/// rest sharing the remaining budget equally. Core positions are a seeded
/// random subset.
inline CoreScores planted_core_scores(Index n, Index core_count, double core_value, double M, std::uint64_t seed)
{
    if (core_count < 0 || core_count >= n) throw ConfigError("core count must lie in [0, N)");
    const double filler = (M - static_cast<double>(core_count) * core_value) / static_cast<double>(n - core_count);
    if (filler < 0.0 || filler > 1.0 || core_value < 0.0 || core_value > 1.0)
        throw ConfigError("planted core scores do not fit in [0,1] with the requested budget");
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    for (Index i = n - 1; i > 0; --i)
        std::swap(order[static_cast<std::size_t>(i)],
                  order[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i + 1)))]);
    Vector c = Vector::Constant(n, filler);
    for (Index k = 0; k < core_count; ++k) c[order[static_cast<std::size_t>(k)]] = core_value;
    return CoreScores(std::move(c), M);
}

struct SampleOptions {
    // Entries with |theta_ij| below this are zeroed; unset means the 30th
    // percentile of the drawn magnitudes.
    std::optional<double> sparsify_at;
    double pd_margin = 0.1;
    double eps_w = 1e-3;
};

/// Draws theta_ij ~ Laplace(0, 1 / (lambda w_ij)) for i < j, hard-thresholds
/// small entries, sets theta_ii = sum_j |theta_ij| + pd_margin so theta is
/// strictly diagonally dominant, and samples d columns from N(0, theta^{-1}).
inline SyntheticInstance sample_instance(Index n, Index d, const CoreScores& c_true, double lambda, double e,
                                         const DistanceMatrix* dist, std::uint64_t seed,
                                         const SampleOptions& opts = {})
{
    if (n < 2 || d < 1) throw ConfigError("sample_instance needs N >= 2 and d >= 1");
    if (c_true.size() != n) throw ConfigError("planted core scores have the wrong length");
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
    if (!(opts.pd_margin > 0.0)) throw ConfigError("pd_margin must be positive");
    const WeightMatrix w = compute_weights(c_true, dist, e, opts.eps_w);

    Rng rng(seed);
    Matrix theta = Matrix::Zero(n, n);
    std::vector<double> magnitudes;
    magnitudes.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < j; ++i) {
            const double v = rng.laplace(1.0 / (lambda * w(i, j)));
            theta(i, j) = theta(j, i) = v;
            magnitudes.push_back(std::abs(v));
        }
    }

    double threshold = 0.0;
    if (opts.sparsify_at) {
        threshold = *opts.sparsify_at;
    } else {
        std::vector<double> sorted = magnitudes;
        std::sort(sorted.begin(), sorted.end());
        threshold = sorted[static_cast<std::size_t>(0.3 * static_cast<double>(sorted.size()))];
    }
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i)
            if (i != j && std::abs(theta(i, j)) < threshold) theta(i, j) = 0.0;

    for (Index i = 0; i < n; ++i) theta(i, i) = theta.row(i).cwiseAbs().sum() + opts.pd_margin;

    Eigen::LLT<Matrix> llt(theta);
    if (llt.info() != Eigen::Success) throw InternalError("planted precision is not positive definite");
    const Matrix cov = llt.solve(Matrix::Identity(n, n));
    Eigen::LLT<Matrix> cov_llt(detail::symmetrized(cov));
    if (cov_llt.info() != Eigen::Success) throw InternalError("planted covariance is not positive definite");
    const Matrix L = cov_llt.matrixL();

    Matrix z(n, d);
    for (Index k = 0; k < d; ++k)
        for (Index i = 0; i < n; ++i) z(i, k) = rng.normal();

    std::optional<DistanceMatrix> dist_copy;
    if (dist) dist_copy = *dist;
    return SyntheticInstance{c_true, Precision(std::move(theta)), FeatureMatrix(L * z), std::move(dist_copy), seed};
}

} // namespace cpgraph
