#pragma once
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <cpgraph/types.hpp>

namespace cpgraph {

struct OrderedGraph {
    Matrix matrix;                  // rows/columns in descending score order
    std::vector<Index> permutation; // permutation[k] = original index at position k
};

/// Stable descending order of scores; equal scores keep ascending index.
inline std::vector<Index> descending_order(const Vector& scores)
{
    std::vector<Index> perm(static_cast<std::size_t>(scores.size()));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::stable_sort(perm.begin(), perm.end(), [&](Index a, Index b) { return scores[a] > scores[b]; });
    return perm;
}

inline OrderedGraph order_by_scores(const Matrix& matrix, const Vector& scores)
{
    const Index n = matrix.rows();
    if (matrix.cols() != n || scores.size() != n) throw InputError("order_by_scores: dimension mismatch");
    OrderedGraph out{Matrix(n, n), descending_order(scores)};
    for (Index b = 0; b < n; ++b)
        for (Index a = 0; a < n; ++a)
            out.matrix(a, b) = matrix(out.permutation[static_cast<std::size_t>(a)],
                                      out.permutation[static_cast<std::size_t>(b)]);
    return out;
}

/// Core-block size used throughout the evaluation: floor(N/4), at least 1.
inline Index default_core_block(Index n) { return std::max<Index>(1, n / 4); }

/// ||A - ideal||_F^2 where the ideal model is an all-ones t x t leading block
/// (its diagonal included) and zero elsewhere.
inline double ideal_block_distance(const OrderedGraph& ordered, Index t)
{
    const Matrix& A = ordered.matrix;
    const Index n = A.rows();
    if (t < 1 || t > n) throw InputError("ideal_block_distance: t must lie in [1, N]");
    double acc = 0.0;
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) {
            const double ideal = (i < t && j < t) ? 1.0 : 0.0;
            const double diff = A(i, j) - ideal;
            acc += diff * diff;
        }
    return acc;
}

struct MethodRow {
    std::string method;
    double truth_distance;                    // ||Theta_0 - ideal||_F^2
    std::optional<double> estimate_distance;  // |||Theta| - ideal||_F^2, proposed method only
};

struct ComparisonTable {
    Index t;
    std::vector<MethodRow> rows; // in map key order
};

struct CompareOptions {
    std::string proposed = "proposed";
    // Compare the support indicator of the estimate instead of raw |theta|.
    bool binarize_estimate = false;
    double threshold = 0.0;
};

/// Table of block-model distances: the ground-truth graph ordered by each
/// method's scores, and the estimated |theta| ordered by the proposed scores.
inline ComparisonTable compare_methods(const Matrix& truth, const Matrix& theta_est,
                                       const std::map<std::string, Vector>& scores_by_method,
                                       const CompareOptions& opts = {})
{
    const Index n = truth.rows();
    if (truth.cols() != n || theta_est.rows() != n || theta_est.cols() != n)
        throw InputError("compare_methods: dimension mismatch");
    ComparisonTable table{default_core_block(n), {}};
    for (const auto& [name, scores] : scores_by_method) {
        if (scores.size() != n) throw InputError("compare_methods: scores for '" + name + "' have the wrong length");
        MethodRow row{name, ideal_block_distance(order_by_scores(truth, scores), table.t), std::nullopt};
        if (name == opts.proposed) {
            Matrix est = theta_est.cwiseAbs();
            if (opts.binarize_estimate) {
                for (Index j = 0; j < n; ++j)
                    for (Index i = 0; i < n; ++i) est(i, j) = (i != j && est(i, j) > opts.threshold) ? 1.0 : 0.0;
            }
            row.estimate_distance = ideal_block_distance(order_by_scores(est, scores), table.t);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

struct SupportRecovery {
    double precision;
    double recall;
    double f1;
    Index true_edges;
    Index estimated_edges;
    Index shared_edges;
};

/// Edge-set precision/recall over unordered pairs i < j. Empty estimates (or
/// empty truth) give 0 for the undefined ratio.
inline SupportRecovery support_recovery(const Matrix& truth, const Matrix& estimate)
{
    const Index n = truth.rows();
    if (truth.cols() != n || estimate.rows() != n || estimate.cols() != n)
        throw InputError("support_recovery: dimension mismatch");
    Index t = 0, e = 0, both = 0;
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < j; ++i) {
            const bool a = truth(i, j) != 0.0;
            const bool b = estimate(i, j) != 0.0;
            t += a;
            e += b;
            both += a && b;
        }
    const double precision = e > 0 ? static_cast<double>(both) / static_cast<double>(e) : 0.0;
    const double recall = t > 0 ? static_cast<double>(both) / static_cast<double>(t) : 0.0;
    const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    return {precision, recall, f1, t, e, both};
}

struct GroupDifference {
    Vector diff;
    std::vector<Index> top_k;
};

/// |mean_a - mean_b| of l1-normalized score vectors, with the indices of the
/// k largest entries (ties to the lower index).
inline GroupDifference group_compare(const std::vector<Vector>& group_a, const std::vector<Vector>& group_b,
                                     Index k)
{
    if (group_a.empty() || group_b.empty()) throw InputError("group_compare: both groups need at least one subject");
    const Index n = group_a.front().size();
    auto mean_of = [n](const std::vector<Vector>& g) {
        Vector m = Vector::Zero(n);
        for (const Vector& c : g) {
            if (c.size() != n) throw InputError("group_compare: score vectors have different lengths");
            const double s = c.sum();
            if (!(s > 0.0)) throw InputError("group_compare: a score vector has nonpositive sum");
            m += c / s;
        }
        return Vector(m / static_cast<double>(g.size()));
    };
    const Vector diff = (mean_of(group_a) - mean_of(group_b)).cwiseAbs();
    std::vector<Index> order = descending_order(diff);
    order.resize(static_cast<std::size_t>(std::clamp<Index>(k, 0, n)));
    return {diff, std::move(order)};
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman_correlation(const Vector& a, const Vector& b)
{
    if (a.size() != b.size() || a.size() < 2) throw InputError("spearman_correlation: need two equal-length vectors");
    auto ranks = [](const Vector& v) {
        const Index n = v.size();
        std::vector<Index> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), Index{0});
        std::stable_sort(idx.begin(), idx.end(), [&](Index x, Index y) { return v[x] < v[y]; });
        Vector r(n);
        for (Index s = 0; s < n;) {
            Index e = s;
            while (e + 1 < n && v[idx[static_cast<std::size_t>(e + 1)]] == v[idx[static_cast<std::size_t>(s)]]) ++e;
            const double avg = 0.5 * static_cast<double>(s + e) + 1.0;
            for (Index k = s; k <= e; ++k) r[idx[static_cast<std::size_t>(k)]] = avg;
            s = e + 1;
        }
        return r;
    };
    const Vector ra = ranks(a);
    const Vector rb = ranks(b);
    const Vector da = ra.array() - ra.mean();
    const Vector db = rb.array() - rb.mean();
    const double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
    return denom > 0.0 ? da.dot(db) / denom : 0.0;
}

/// Fraction of unordered pairs inside `nodes` that are edges of A.
inline double block_density(const Matrix& A, const std::vector<Index>& nodes)
{
    Index pairs = 0, edges = 0;
    for (std::size_t q = 0; q < nodes.size(); ++q)
        for (std::size_t p = 0; p < q; ++p) {
            ++pairs;
            edges += A(nodes[p], nodes[q]) != 0.0;
        }
    return pairs > 0 ? static_cast<double>(edges) / static_cast<double>(pairs) : 0.0;
}

} // namespace cpgraph
