#pragma once
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <cpgraph/types.hpp>

namespace cpgraph::lp {

enum class RowKind { LessEqual, Equal };

struct Row {
    std::vector<std::pair<Index, double>> coeffs; // sparse (column, value)
    RowKind kind;
    double rhs; // must be >= 0
};

enum class Status { Optimal, Infeasible, IterationLimit };

struct Solution {
    Status status = Status::Infeasible;
    Vector x;          // structural variables
    Vector duals;      // one per row; >= 0 for LessEqual rows
    double objective = 0.0;
    int pivots = 0;
};

/// Dense two-phase tableau simplex for
///   maximize c^T x  s.t.  rows,  x >= 0,
/// with Bland's rule for both entering and leaving variables. Each row owns
/// one slack (LessEqual) or artificial (Equal) column, so the columns of the
/// initial basis carry B^{-1} and the duals are read off the reduced costs.
class BlandSimplex {
public:
    BlandSimplex(const Vector& cost, const std::vector<Row>& rows, int max_pivots = 200000)
        : n_(cost.size()), m_(static_cast<Index>(rows.size())), cost_(cost), max_pivots_(max_pivots)
    {
        total_ = n_ + m_;
        T_ = Matrix::Zero(m_ + 1, total_ + 1);
        basis_.resize(static_cast<std::size_t>(m_));
        artificial_.assign(static_cast<std::size_t>(total_), false);
        for (Index r = 0; r < m_; ++r) {
            const Row& row = rows[static_cast<std::size_t>(r)];
            for (const auto& [col, v] : row.coeffs) T_(r + 1, col) += v;
            T_(r + 1, n_ + r) = 1.0;
            T_(r + 1, total_) = row.rhs;
            basis_[static_cast<std::size_t>(r)] = n_ + r;
            if (row.kind == RowKind::Equal) artificial_[static_cast<std::size_t>(n_ + r)] = true;
        }
    }

    Solution solve()
    {
        Solution out;
        // Phase 1: maximize -sum(artificials).
        bool any_artificial = false;
        T_.row(0).setZero();
        for (Index r = 0; r < m_; ++r) {
            if (artificial_[static_cast<std::size_t>(n_ + r)]) {
                any_artificial = true;
                // reduced cost row = c_B B^{-1} A - c with c_art = -1
                T_.row(0) -= T_.row(r + 1);
                T_(0, n_ + r) += 1.0;
            }
        }
        if (any_artificial) {
            if (!iterate(false)) {
                out.status = Status::IterationLimit;
                out.pivots = pivots_;
                return out;
            }
            const double infeasibility = -T_(0, total_);
            double scale = 1.0;
            for (Index r = 0; r < m_; ++r) scale = std::max(scale, std::abs(T_(r + 1, total_)));
            if (infeasibility < -kFeasTol * scale || infeasibility > kFeasTol * scale) {
                out.status = Status::Infeasible;
                out.pivots = pivots_;
                return out;
            }
            drive_out_artificials();
        }

        // Phase 2.
        T_.row(0).setZero();
        for (Index j = 0; j < n_; ++j) T_(0, j) = -cost_[j];
        for (Index r = 0; r < m_; ++r) {
            const Index b = basis_[static_cast<std::size_t>(r)];
            if (b < n_ && cost_[b] != 0.0) T_.row(0) += cost_[b] * T_.row(r + 1);
        }
        if (!iterate(true)) {
            out.status = Status::IterationLimit;
            out.pivots = pivots_;
            return out;
        }

        out.status = Status::Optimal;
        out.x = Vector::Zero(n_);
        for (Index r = 0; r < m_; ++r) {
            const Index b = basis_[static_cast<std::size_t>(r)];
            if (b < n_) out.x[b] = T_(r + 1, total_);
        }
        out.duals.resize(m_);
        for (Index r = 0; r < m_; ++r) out.duals[r] = T_(0, n_ + r);
        out.objective = T_(0, total_);
        out.pivots = pivots_;
        return out;
    }

private:
    static constexpr double kPivotTol = 1e-11;
    static constexpr double kCostTol = 1e-12;
    static constexpr double kFeasTol = 1e-10;

    bool enterable(Index j, bool phase2) const
    {
        return !(phase2 && artificial_[static_cast<std::size_t>(j)]);
    }

    bool iterate(bool phase2)
    {
        for (;;) {
            Index enter = -1;
            for (Index j = 0; j < total_; ++j) {
                if (T_(0, j) < -kCostTol && enterable(j, phase2)) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return true;

            Index leave_row = -1;
            double best_ratio = std::numeric_limits<double>::infinity();
            Index best_var = std::numeric_limits<Index>::max();
            for (Index r = 0; r < m_; ++r) {
                const double a = T_(r + 1, enter);
                if (a <= kPivotTol) continue;
                const double ratio = T_(r + 1, total_) / a;
                const Index var = basis_[static_cast<std::size_t>(r)];
                if (ratio < best_ratio - 1e-14 || (std::abs(ratio - best_ratio) <= 1e-14 && var < best_var)) {
                    best_ratio = ratio;
                    best_var = var;
                    leave_row = r;
                }
            }
            // The feasible sets used here are bounded, so an unbounded ray
            // only appears through round-off; treat it as converged.
            if (leave_row < 0) return true;
            if (pivots_ >= max_pivots_) return false;
            pivot(leave_row, enter);
        }
    }

    void pivot(Index r, Index col)
    {
        const Index pr = r + 1;
        T_.row(pr) /= T_(pr, col);
        for (Index k = 0; k <= m_; ++k) {
            if (k == pr) continue;
            const double f = T_(k, col);
            if (f != 0.0) T_.row(k) -= f * T_.row(pr);
        }
        T_(pr, total_) = std::max(T_(pr, total_), 0.0);
        basis_[static_cast<std::size_t>(r)] = col;
        ++pivots_;
    }

    void drive_out_artificials()
    {
        for (Index r = 0; r < m_; ++r) {
            if (!artificial_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])]) continue;
            for (Index j = 0; j < total_; ++j) {
                if (artificial_[static_cast<std::size_t>(j)]) continue;
                if (std::abs(T_(r + 1, j)) > kPivotTol) {
                    pivot(r, j);
                    break;
                }
            }
            // A row with no non-artificial support is redundant; its
            // artificial stays basic at zero and can never re-enter.
        }
    }

    Index n_;
    Index m_;
    Index total_ = 0;
    Vector cost_;
    int max_pivots_;
    int pivots_ = 0;
    Matrix T_;
    std::vector<Index> basis_;
    std::vector<bool> artificial_;
};

} // namespace cpgraph::lp
