#pragma once
#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include <cpgraph/types.hpp>

namespace cpgraph {

/// Maximum-likelihood covariance of the d columns of X (1/d normalization,
/// per-node mean removed) plus ridge * I. The result is exactly symmetric.
inline Matrix empirical_covariance(const FeatureMatrix& X, double ridge = 0.0)
{
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw InputError("ridge must be finite and nonnegative");
    const Matrix& x = X.values();
    const Vector mean = x.rowwise().mean();
    const Matrix centered = x.colwise() - mean;
    Matrix S = (centered * centered.transpose()) / static_cast<double>(x.cols());
    S = detail::symmetrized(S);
    S.diagonal().array() += ridge;
    return S;
}

/// Returns log det of a symmetric positive-definite matrix, or throws
/// DomainError when the Cholesky factorization fails.
inline double log_det_pd(const Matrix& A)
{
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() != Eigen::Success) throw DomainError("log det undefined: matrix is not positive definite");
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

/// Penalty weights w_ij = max(eps_w, 1 - c_i - c_j + e ln d_ij) for i != j and
/// w_ii = 0.
inline WeightMatrix compute_weights(const CoreScores& c, const DistanceMatrix* dist, double e, double eps_w)
{
    const Index n = c.size();
    if (!(eps_w > 0.0)) throw ConfigError("eps_w must be positive");
    if (!(e >= 0.0)) throw ConfigError("e must be nonnegative");
    if (e > 0.0) {
        if (dist == nullptr) throw ConfigError("e > 0 requires a distance matrix");
        if (dist->size() != n) throw ConfigError("distance matrix size does not match the core scores");
        if (!dist->offdiagonal_positive())
            throw ConfigError("e > 0 requires strictly positive off-diagonal distances");
    }
    Matrix w = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < j; ++i) {
            double raw = 1.0 - c[i] - c[j];
            if (e > 0.0) raw += e * std::log((*dist)(i, j));
            w(i, j) = w(j, i) = std::max(eps_w, raw);
        }
    }
    return WeightMatrix(std::move(w), eps_w);
}

/// lambda * sum over ordered pairs i != j of w_ij |theta_ij|.
inline double weighted_l1_penalty(const Matrix& theta, const Matrix& weights, double lambda)
{
    double acc = 0.0;
    for (Index j = 0; j < theta.cols(); ++j)
        for (Index i = 0; i < theta.rows(); ++i)
            if (i != j) acc += weights(i, j) * std::abs(theta(i, j));
    return lambda * acc;
}

/// log det(theta) - tr(S theta) - lambda * sum_{i != j} w_ij |theta_ij| for a
/// fixed weight matrix.
inline double penalized_log_likelihood(const Matrix& theta, const Matrix& S, const Matrix& weights, double lambda)
{
    return log_det_pd(theta) - (S.cwiseProduct(theta)).sum() - weighted_l1_penalty(theta, weights, lambda);
}

/// The joint MAP objective evaluated with the weights implied by c.
inline double joint_objective(const Precision& theta, const CoreScores& c, const Matrix& S, const Hyperparams& hyper,
                              const DistanceMatrix* dist = nullptr)
{
    if (theta.size() != c.size() || S.rows() != theta.size() || S.cols() != theta.size())
        throw InputError("joint_objective: dimension mismatch");
    const WeightMatrix w = compute_weights(c, dist, hyper.e, hyper.eps_w);
    return penalized_log_likelihood(theta.values(), S, w.values(), hyper.lambda);
}

} // namespace cpgraph
