#pragma once
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <cpgraph/types.hpp>

namespace cpgraph {

enum class BaselineMethod { Minres, KCores };

inline const char* to_string(BaselineMethod m) { return m == BaselineMethod::Minres ? "minres" : "kcores"; }

struct BaselineScores {
    Vector c;   // scaled to [0,1]
    BaselineMethod method = BaselineMethod::Minres;
    Vector raw; // before scaling
    int iterations = 0;
    bool converged = true;
    std::string warning;
    std::vector<double> residual_trace; // minres only: residual after every sweep
};

namespace detail {

inline void validate_adjacency(const Matrix& A, const char* who)
{
    if (A.rows() != A.cols()) throw InputError(std::string(who) + ": adjacency matrix is not square");
    if (!A.allFinite()) throw InputError(std::string(who) + ": adjacency matrix has non-finite entries");
    if (!is_symmetric(A)) throw InputError(std::string(who) + ": adjacency matrix is not symmetric");
    if ((A.array() < 0.0).any()) throw InputError(std::string(who) + ": adjacency matrix has negative entries");
    for (Index i = 0; i < A.rows(); ++i)
        if (A(i, i) != 0.0) throw InputError(std::string(who) + ": adjacency diagonal must be zero");
}

} // namespace detail

/// sum_{i != j} (A_ij - c_i c_j)^2
inline double minres_residual(const Matrix& A, const Vector& c)
{
    double r = 0.0;
    for (Index j = 0; j < A.cols(); ++j)
        for (Index i = 0; i < A.rows(); ++i)
            if (i != j) {
                const double e = A(i, j) - c[i] * c[j];
                r += e * e;
            }
    return r;
}

/// MINRES core scores: least-squares fit of the off-diagonal adjacency by
/// c c^T using cyclic exact coordinate minimization, started from the
/// normalized degree vector. The output is min-max scaled to [0,1].
inline BaselineScores minres_scores(const Matrix& A, double tol = 1e-10, int max_iter = 10000)
{
    detail::validate_adjacency(A, "minres_scores");
    const Index n = A.rows();
    BaselineScores out;
    out.c = Vector::Zero(n);
    out.raw = Vector::Zero(n);

    const Vector degree = A.rowwise().sum();
    const double max_degree = degree.maxCoeff();
    if (!(max_degree > 0.0)) {
        out.warning = "empty graph: all MINRES scores are zero";
        return out;
    }

    Vector c = degree / max_degree;
    out.residual_trace.push_back(minres_residual(A, c));
    out.converged = false;
    for (int sweep = 1; sweep <= max_iter; ++sweep) {
        double max_change = 0.0;
        for (Index i = 0; i < n; ++i) {
            double num = 0.0;
            double den = 0.0;
            for (Index j = 0; j < n; ++j) {
                if (j == i) continue;
                num += A(i, j) * c[j];
                den += c[j] * c[j];
            }
            if (den <= 0.0) continue;
            const double next = num / den;
            max_change = std::max(max_change, std::abs(next - c[i]));
            c[i] = next;
        }
        out.residual_trace.push_back(minres_residual(A, c));
        out.iterations = sweep;
        if (max_change < tol) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged) out.warning = "MINRES reached the sweep limit before the scores settled";

    out.raw = c;
    const double lo = c.minCoeff();
    const double hi = c.maxCoeff();
    if (hi > lo)
        out.c = (c.array() - lo) / (hi - lo);
    else if (hi > 0.0)
        out.c = c / hi;
    return out;
}

/// k-core numbers by repeated removal of a minimum-degree vertex; scores are
/// core numbers divided by the maximum core number.
inline BaselineScores kcore_scores(const Matrix& A)
{
    detail::validate_adjacency(A, "kcore_scores");
    const Index n = A.rows();
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i)
            if (A(i, j) != 0.0 && A(i, j) != 1.0) throw InputError("kcore_scores: adjacency must be binary");

    std::vector<Index> degree(static_cast<std::size_t>(n), 0);
    for (Index i = 0; i < n; ++i) degree[static_cast<std::size_t>(i)] = static_cast<Index>(A.row(i).sum());
    std::vector<bool> removed(static_cast<std::size_t>(n), false);
    Vector core = Vector::Zero(n);
    Index level = 0;
    for (Index step = 0; step < n; ++step) {
        Index pick = -1;
        for (Index v = 0; v < n; ++v) {
            if (removed[static_cast<std::size_t>(v)]) continue;
            if (pick < 0 || degree[static_cast<std::size_t>(v)] < degree[static_cast<std::size_t>(pick)]) pick = v;
        }
        level = std::max(level, degree[static_cast<std::size_t>(pick)]);
        core[pick] = static_cast<double>(level);
        removed[static_cast<std::size_t>(pick)] = true;
        for (Index u = 0; u < n; ++u)
            if (!removed[static_cast<std::size_t>(u)] && A(pick, u) != 0.0) --degree[static_cast<std::size_t>(u)];
    }

    BaselineScores out;
    out.method = BaselineMethod::KCores;
    out.c = Vector::Zero(n);
    out.raw = core;
    const double hi = core.maxCoeff();
    if (hi > 0.0) out.c = core / hi;
    return out;
}

} // namespace cpgraph
