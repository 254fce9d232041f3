#pragma once
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <cpgraph/simplex.hpp>
#include <cpgraph/types.hpp>

namespace cpgraph {

struct LpResult {
    CoreScores c;
    double objective;                              // sum_ij |theta_ij| (c_i + c_j)
    std::vector<std::pair<Index, Index>> active_constraints; // tight pairwise rows, i < j
    int iterations;                                // simplex pivots over all rounds
    int rounds;                                    // constraint-generation rounds
    double duality_gap;
};

struct LpOptions {
    // Count |theta_ii| in the gains (2|theta_ii| towards g_i).
    bool include_diagonal = true;
    // Pairwise rows added per constraint-generation round (0 = 2N).
    std::size_t rows_per_round = 0;
};

namespace detail {

struct PairBounds {
    Index n;
    Matrix bound; // upper triangle: 1 + e ln d_ij - eps_w
};

inline PairBounds pair_bounds(Index n, const DistanceMatrix* dist, double e, double eps_w)
{
    if (!(e >= 0.0)) throw ConfigError("e must be nonnegative");
    if (!(eps_w > 0.0)) throw ConfigError("eps_w must be positive");
    if (e > 0.0) {
        if (dist == nullptr) throw ConfigError("e > 0 requires a distance matrix");
        if (dist->size() != n) throw ConfigError("distance matrix size does not match");
        if (!dist->offdiagonal_positive()) throw ConfigError("e > 0 requires strictly positive distances");
    }
    Matrix b = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < j; ++i) {
            double v = 1.0 - eps_w;
            if (e > 0.0) v += e * std::log((*dist)(i, j));
            b(i, j) = b(j, i) = v;
        }
    }
    return {n, std::move(b)};
}

struct RestrictedSolve {
    Vector c;
    Vector duals;
    double objective;
    int pivots;
};

// Sum + box + the listed pairwise rows. Returns false if infeasible.
// Without a budget the sum row is omitted.
inline bool solve_restricted(const Vector& gains, std::optional<double> M, const PairBounds& pb,
                             const std::vector<std::pair<Index, Index>>& pairs, RestrictedSolve& out)
{
    const Index n = gains.size();
    std::vector<lp::Row> rows;
    rows.reserve(static_cast<std::size_t>(n) + 1 + pairs.size());
    if (M) {
        lp::Row sum{{}, lp::RowKind::Equal, *M};
        for (Index i = 0; i < n; ++i) sum.coeffs.emplace_back(i, 1.0);
        rows.push_back(std::move(sum));
    }
    for (Index i = 0; i < n; ++i) rows.push_back(lp::Row{{{i, 1.0}}, lp::RowKind::LessEqual, 1.0});
    for (const auto& [i, j] : pairs)
        rows.push_back(lp::Row{{{i, 1.0}, {j, 1.0}}, lp::RowKind::LessEqual, pb.bound(i, j)});

    lp::BlandSimplex simplex(gains, rows);
    const lp::Solution sol = simplex.solve();
    out.pivots = sol.pivots;
    if (sol.status == lp::Status::IterationLimit) throw InternalError("core-score simplex hit its pivot limit");
    if (sol.status != lp::Status::Optimal) return false;
    out.c = sol.x;
    out.duals = sol.duals;
    out.objective = sol.objective;
    return true;
}

// Fractional-knapsack optimum of the sum + box relaxation, highest gain first
// with ties to the lowest index. Duals: y_sum = gain of the first unfilled
// coordinate, box duals = max(g_i - y_sum, 0).
inline RestrictedSolve greedy_fill(const Vector& gains, double M)
{
    const Index n = gains.size();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return gains[a] > gains[b]; });
    RestrictedSolve out{Vector::Zero(n), Vector::Zero(n + 1), 0.0, 0};
    double remaining = M;
    double y_sum = gains[order.back()];
    bool marginal_found = false;
    for (Index k : order) {
        const double take = std::clamp(remaining, 0.0, 1.0);
        out.c[k] = take;
        remaining -= take;
        if (!marginal_found && take < 1.0) {
            y_sum = gains[k];
            marginal_found = true;
        }
    }
    out.duals[0] = y_sum;
    for (Index i = 0; i < n; ++i) out.duals[1 + i] = std::max(gains[i] - y_sum, 0.0);
    out.objective = gains.dot(out.c);
    return out;
}

// Adds the most violated pairwise rows in batches and re-solves until the
// current point satisfies every pairwise bound. Returns false if a restricted
// problem is infeasible.
inline bool generate_rows(const Vector& gains, std::optional<double> M, const PairBounds& pb, std::size_t batch,
                          RestrictedSolve& current, std::vector<std::pair<Index, Index>>& rows, int& pivots,
                          int& rounds)
{
    const Index n = gains.size();
    constexpr double kViolationTol = 1e-12;
    std::vector<char> in_rows(static_cast<std::size_t>(n * n), 0);
    for (const auto& [i, j] : rows) in_rows[static_cast<std::size_t>(i * n + j)] = 1;
    for (;;) {
        std::vector<std::tuple<double, Index, Index>> violated;
        for (Index j = 0; j < n; ++j)
            for (Index i = 0; i < j; ++i) {
                const double v = current.c[i] + current.c[j] - pb.bound(i, j);
                if (v > kViolationTol && !in_rows[static_cast<std::size_t>(i * n + j)]) violated.emplace_back(v, i, j);
            }
        if (violated.empty()) return true;
        std::stable_sort(violated.begin(), violated.end(),
                         [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
        if (violated.size() > batch) violated.resize(batch);
        for (const auto& [v, i, j] : violated) {
            rows.emplace_back(i, j);
            in_rows[static_cast<std::size_t>(i * n + j)] = 1;
        }
        ++rounds;
        if (!solve_restricted(gains, M, pb, rows, current)) return false;
        pivots += current.pivots;
    }
}

inline double max_feasible_mass(const PairBounds& pb);

inline std::string mass_error(double M, const PairBounds& pb)
{
    std::ostringstream msg;
    msg << "core-score LP infeasible: budget M = " << M
        << " exceeds the largest attainable sum of core scores (" << max_feasible_mass(pb)
        << ") under the box and pairwise bounds";
    return msg.str();
}

inline LpResult solve_core_lp(const Vector& raw_gains, double M, const PairBounds& pb, double lp_tol,
                              const LpOptions& opts, bool report_mass_on_failure)
{
    const Index n = raw_gains.size();
    if (!(M > 0.0)) throw ConfigError("core-score budget M must be positive");
    if (!(lp_tol > 0.0)) throw ConfigError("lp_tol must be positive");
    if (M > static_cast<double>(n)) {
        std::ostringstream msg;
        msg << "core-score LP infeasible: budget M = " << M << " exceeds the box bound N = " << n;
        throw InfeasibleError(msg.str());
    }
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < j; ++i)
            if (pb.bound(i, j) < 0.0) {
                std::ostringstream msg;
                msg << "core-score LP infeasible: pairwise bound for (" << i << ", " << j
                    << ") is negative (" << pb.bound(i, j) << "), so c_i + c_j cannot reach it";
                throw InfeasibleError(msg.str());
            }

    // Work with gains scaled to unit max so tolerances are scale-free.
    const double gmax = raw_gains.cwiseAbs().maxCoeff();
    const double scale = gmax > 0.0 ? gmax : 1.0;
    const Vector gains = raw_gains / scale;

    const std::size_t batch = opts.rows_per_round ? opts.rows_per_round : static_cast<std::size_t>(2 * n);
    std::vector<std::pair<Index, Index>> rows;
    int pivots = 0;
    int rounds = 0;
    RestrictedSolve current = greedy_fill(gains, M);
    if (!generate_rows(gains, M, pb, batch, current, rows, pivots, rounds)) {
        if (report_mass_on_failure) throw InfeasibleError(mass_error(M, pb));
        throw InfeasibleError("core-score LP infeasible");
    }

    // Duality certificate on the full problem: rows not generated carry a
    // zero dual, so feasibility of the restricted duals carries over.
    const Vector& y = current.duals;
    double dual_obj = y[0] * M;
    for (Index i = 0; i < n; ++i) dual_obj += y[1 + i];
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto [i, j] = rows[k];
        dual_obj += y[static_cast<Index>(1 + n + k)] * pb.bound(i, j);
    }
    Vector reduced = Vector::Constant(n, y[0]);
    for (Index i = 0; i < n; ++i) reduced[i] += y[1 + i];
    double dual_infeas = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto [i, j] = rows[k];
        const double yk = y[static_cast<Index>(1 + n + k)];
        reduced[i] += yk;
        reduced[j] += yk;
        dual_infeas = std::max(dual_infeas, -yk);
    }
    for (Index i = 0; i < n; ++i) {
        dual_infeas = std::max(dual_infeas, gains[i] - reduced[i]);
        dual_infeas = std::max(dual_infeas, -y[1 + i]);
    }
    const double primal_obj = gains.dot(current.c);
    const double gap = std::abs(dual_obj - primal_obj);
    const double slack = lp_tol * std::max(1.0, std::abs(primal_obj));
    if (gap > slack || dual_infeas > slack) {
        std::ostringstream msg;
        msg << "core-score LP failed its optimality certificate (gap " << gap << ", dual infeasibility "
            << dual_infeas << ")";
        throw InternalError(msg.str());
    }

    Vector c = current.c.cwiseMax(0.0).cwiseMin(1.0);
    std::vector<std::pair<Index, Index>> active;
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < j; ++i)
            if (std::abs(c[i] + c[j] - pb.bound(i, j)) <= 1e-9) active.emplace_back(i, j);

    return LpResult{CoreScores(std::move(c), M), scale * primal_obj, std::move(active), pivots, rounds,
                    scale * gap};
}

inline double max_feasible_mass(const PairBounds& pb)
{
    // maximize sum(c) over the box and pairwise bounds, no budget row;
    // negative bounds are clamped to zero
    const Index n = pb.n;
    const PairBounds clamped{n, pb.bound.cwiseMax(0.0)};
    const Vector ones = Vector::Ones(n);
    RestrictedSolve current{ones, Vector::Zero(n), static_cast<double>(n), 0};
    std::vector<std::pair<Index, Index>> rows;
    int pivots = 0;
    int rounds = 0;
    if (!generate_rows(ones, std::nullopt, clamped, static_cast<std::size_t>(2 * n), current, rows, pivots, rounds))
        throw InternalError("could not bound the attainable core mass");
    return current.c.sum();
}

} // namespace detail

/// Gains g_i = 2 * sum_j |theta_ij| (diagonal per options).
inline Vector core_score_gains(const Matrix& abs_theta, bool include_diagonal = true)
{
    const Index n = abs_theta.rows();
    Vector g(n);
    for (Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Index j = 0; j < n; ++j)
            if (include_diagonal || i != j) s += abs_theta(i, j);
        g[i] = 2.0 * s;
    }
    return g;
}

/// Largest sum of core scores compatible with the box and pairwise bounds.
inline double max_core_mass(Index n, const DistanceMatrix* dist, double e, double eps_w)
{
    return detail::max_feasible_mass(detail::pair_bounds(n, dist, e, eps_w));
}

/// Core-score update: maximize sum_ij |theta_ij|(c_i + c_j) subject to
/// sum(c) = M, 0 <= c <= 1 and c_i + c_j <= 1 + e ln d_ij - eps_w (i < j).
/// Pairwise rows are generated lazily and each restricted problem is solved
/// with Bland's rule, so ties resolve deterministically.
inline LpResult core_score_lp(const Matrix& abs_theta, const DistanceMatrix* dist, double e, double M, double eps_w,
                              double lp_tol = 1e-9, const LpOptions& opts = {})
{
    const Index n = abs_theta.rows();
    if (abs_theta.cols() != n) throw InputError("core_score_lp: matrix is not square");
    if (!abs_theta.allFinite()) throw InputError("core_score_lp: non-finite entries");
    if ((abs_theta.array() < 0.0).any()) throw InputError("core_score_lp: entries must be nonnegative");
    if (!detail::is_symmetric(abs_theta)) throw InputError("core_score_lp: matrix is not symmetric");
    const auto pb = detail::pair_bounds(n, dist, e, eps_w);
    return detail::solve_core_lp(core_score_gains(abs_theta, opts.include_diagonal), M, pb, lp_tol, opts, true);
}

/// Core scores of a known graph.
inline LpResult scores_from_graph(const Matrix& adjacency, const DistanceMatrix* dist, double e, double M,
                                  double eps_w = 1e-3, double lp_tol = 1e-9)
{
    if (adjacency.rows() != adjacency.cols()) throw InputError("adjacency matrix is not square");
    if (!adjacency.allFinite()) throw InputError("adjacency matrix has non-finite entries");
    if (!detail::is_symmetric(adjacency)) throw InputError("adjacency matrix is not symmetric");
    if ((adjacency.array() < 0.0).any()) throw InputError("adjacency matrix has negative entries");
    for (Index i = 0; i < adjacency.rows(); ++i)
        if (adjacency(i, i) != 0.0) throw InputError("adjacency matrix has a nonzero diagonal");
    return core_score_lp(adjacency, dist, e, M, eps_w, lp_tol);
}

} // namespace cpgraph
