#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cpgraph/errors.hpp>

namespace cpgraph {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace detail {

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

// Relative asymmetry tolerance for matrices read from text files.
inline bool is_symmetric(const Matrix& m, double rel_tol = 1e-12)
{
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

} // namespace detail

/// Node attributes: one row per node, one column per i.i.d. sample.
class FeatureMatrix {
public:
    explicit FeatureMatrix(Matrix values, std::vector<std::string> labels = {})
        : values_(std::move(values)), labels_(std::move(labels))
    {
        if (values_.cols() == 0) throw InputError("feature matrix has no samples (d = 0)");
        if (values_.rows() < 2) throw InputError("feature matrix needs at least two nodes");
        if (!detail::all_finite(values_)) throw InputError("feature matrix has non-finite entries");
        if (!labels_.empty() && static_cast<Index>(labels_.size()) != values_.rows())
            throw InputError("node label count does not match the number of rows");
    }

    const Matrix& values() const noexcept { return values_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    Index nodes() const noexcept { return values_.rows(); }
    Index samples() const noexcept { return values_.cols(); }

private:
    Matrix values_;
    std::vector<std::string> labels_;
};

/// Pairwise spatial distances. The diagonal is never read.
class DistanceMatrix {
public:
    explicit DistanceMatrix(Matrix values)
    {
        if (values.rows() != values.cols()) throw InputError("distance matrix is not square");
        if (!detail::all_finite(values)) throw InputError("distance matrix has non-finite entries");
        if (!detail::is_symmetric(values)) throw InputError("distance matrix is not symmetric");
        values_ = detail::symmetrized(values);
        values_.diagonal().setZero();
        for (Index j = 0; j < values_.cols(); ++j)
            for (Index i = 0; i < values_.rows(); ++i)
                if (i != j && values_(i, j) < 0.0)
                    throw InputError("distance matrix has negative entries");
    }

    const Matrix& values() const noexcept { return values_; }
    Index size() const noexcept { return values_.rows(); }
    double operator()(Index i, Index j) const { return values_(i, j); }

    bool offdiagonal_positive() const
    {
        for (Index j = 0; j < values_.cols(); ++j)
            for (Index i = 0; i < j; ++i)
                if (!(values_(i, j) > 0.0)) return false;
        return true;
    }

private:
    Matrix values_;
};

/// Per-node core scores in [0,1] whose sum equals the budget M.
class CoreScores {
public:
    static constexpr double kSumTolerance = 1e-8;
    static constexpr double kBoxTolerance = 1e-12;

    CoreScores(Vector values, double budget) : values_(std::move(values)), budget_(budget)
    {
        if (!values_.allFinite() || !std::isfinite(budget_))
            throw InputError("core scores must be finite");
        for (Index i = 0; i < values_.size(); ++i) {
            if (values_[i] < -kBoxTolerance || values_[i] > 1.0 + kBoxTolerance)
                throw InputError("core score " + std::to_string(i) + " outside [0,1]");
            values_[i] = std::clamp(values_[i], 0.0, 1.0);
        }
        if (std::abs(values_.sum() - budget_) > kSumTolerance)
            throw InputError("core scores sum to " + std::to_string(values_.sum()) +
                             " but the budget is " + std::to_string(budget_));
    }

    /// Uniform start (M/N) * 1.
    static CoreScores uniform(Index n, double budget)
    {
        return CoreScores(Vector::Constant(n, budget / static_cast<double>(n)), budget);
    }

    const Vector& values() const noexcept { return values_; }
    double budget() const noexcept { return budget_; }
    Index size() const noexcept { return values_.size(); }
    double operator[](Index i) const { return values_[i]; }

private:
    Vector values_;
    double budget_;
};

/// Symmetric per-entry penalty weights with zero diagonal and off-diagonal
/// entries no smaller than floor().
class WeightMatrix {
public:
    explicit WeightMatrix(Matrix values, double floor = 0.0) : values_(std::move(values)), floor_(floor)
    {
        if (values_.rows() != values_.cols()) throw InputError("weight matrix is not square");
        if (!detail::all_finite(values_)) throw InputError("weight matrix has non-finite entries");
        if (!detail::is_symmetric(values_)) throw InputError("weight matrix is not symmetric");
        values_ = detail::symmetrized(values_);
        values_.diagonal().setZero();
        for (Index j = 0; j < values_.cols(); ++j)
            for (Index i = 0; i < values_.rows(); ++i)
                if (i != j && values_(i, j) < floor_)
                    throw InputError("weight below floor at (" + std::to_string(i) + ", " +
                                     std::to_string(j) + ")");
    }

    /// Every off-diagonal weight equal to `value`.
    static WeightMatrix uniform(Index n, double value = 1.0)
    {
        Matrix w = Matrix::Constant(n, n, value);
        w.diagonal().setZero();
        return WeightMatrix(std::move(w), value);
    }

    const Matrix& values() const noexcept { return values_; }
    double floor() const noexcept { return floor_; }
    Index size() const noexcept { return values_.rows(); }
    double operator()(Index i, Index j) const { return values_(i, j); }

private:
    Matrix values_;
    double floor_;
};

/// Symmetric positive-definite precision matrix.
class Precision {
public:
    explicit Precision(Matrix values)
    {
        if (values.rows() != values.cols()) throw DomainError("precision matrix is not square");
        if (!detail::all_finite(values)) throw DomainError("precision matrix has non-finite entries");
        if (!detail::is_symmetric(values, 1e-10)) throw DomainError("precision matrix is not symmetric");
        values_ = detail::symmetrized(values);
        if (Eigen::LLT<Matrix>(values_).info() != Eigen::Success)
            throw DomainError("precision matrix is not positive definite");
    }

    const Matrix& values() const noexcept { return values_; }
    Index size() const noexcept { return values_.rows(); }
    double operator()(Index i, Index j) const { return values_(i, j); }

private:
    Matrix values_;
};

struct Hyperparams {
    double lambda = 0.1;
    double e = 0.0;
    double M = 1.0;
    double eps_w = 1e-3;
    double glasso_tol = 1e-5;
    double lp_tol = 1e-9;
    double bca_rel_tol = 1e-5;
    int bca_max_iter = 50;
    int glasso_max_iter = 1000;
    double ridge = 0.0;
    // Count |theta_ii| in the c-step gains. When off, the c-step is the exact
    // maximizer of the joint objective over c.
    bool diagonal_gains = false;

    /// Checks the scalar invariants; `nodes` bounds the budget M.
    void validate(Index nodes) const
    {
        if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
        if (!(e >= 0.0)) throw ConfigError("e must be nonnegative");
        if (!(M > 0.0)) throw ConfigError("M must be positive");
        if (M > static_cast<double>(nodes))
            throw ConfigError("M = " + std::to_string(M) + " exceeds the node count " + std::to_string(nodes));
        if (!(eps_w > 0.0)) throw ConfigError("eps_w must be positive");
        if (!(glasso_tol > 0.0 && lp_tol > 0.0 && bca_rel_tol > 0.0))
            throw ConfigError("tolerances must be positive");
        if (bca_max_iter < 1 || glasso_max_iter < 1) throw ConfigError("iteration caps must be at least 1");
        if (!(ridge >= 0.0)) throw ConfigError("ridge must be nonnegative");
    }
};

} // namespace cpgraph
