#pragma once
#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>

#include <cpgraph/model.hpp>
#include <cpgraph/types.hpp>

namespace cpgraph {

struct GlassoResult {
    Precision theta;
    double objective;        // log det - tr(S theta) - weighted penalty
    double kkt_residual;     // max-norm of the minimum-norm subgradient
    int iterations;          // Newton steps taken
    bool converged;
    std::vector<double> objective_trace; // objective before the first step and after every step
};

namespace detail {

inline double soft_threshold(double z, double r)
{
    if (z > r) return z - r;
    if (z < -r) return z + r;
    return 0.0;
}

inline void validate_covariance(const Matrix& S)
{
    if (S.rows() != S.cols()) throw InputError("covariance matrix is not square");
    if (!S.allFinite()) throw InputError("covariance matrix has non-finite entries");
    if (!is_symmetric(S, 1e-10)) throw InputError("covariance matrix is not symmetric");
    for (Index i = 0; i < S.rows(); ++i)
        if (!(S(i, i) > 0.0))
            throw InputError("covariance diagonal entry " + std::to_string(i) + " is not positive");
}

// Max-norm of the minimum-norm element of the subdifferential of
//   -log det X + tr(S X) + sum_ij penalty_ij |X_ij|
// given the inverse of X.
inline double kkt_residual_from_inverse(const Matrix& X, const Matrix& Xinv, const Matrix& S, const Matrix& penalty)
{
    double worst = 0.0;
    for (Index j = 0; j < X.cols(); ++j) {
        for (Index i = 0; i < X.rows(); ++i) {
            const double g = S(i, j) - Xinv(i, j);
            const double r = penalty(i, j);
            double v;
            if (X(i, j) > 0.0)
                v = std::abs(g + r);
            else if (X(i, j) < 0.0)
                v = std::abs(g - r);
            else
                v = std::max(std::abs(g) - r, 0.0);
            worst = std::max(worst, v);
        }
    }
    return worst;
}

inline double weighted_abs_sum(const Matrix& X, const Matrix& penalty) { return penalty.cwiseProduct(X.cwiseAbs()).sum(); }

} // namespace detail

/// Recomputes the KKT residual of the weighted graphical lasso from scratch:
/// zero when theta^{-1} - S equals lambda * w_ij * sign(theta_ij) on the
/// support, stays within [-lambda w_ij, lambda w_ij] off the support, and
/// vanishes on the diagonal.
inline double glasso_kkt_residual(const Matrix& theta, const Matrix& S, const WeightMatrix& W, double lambda)
{
    Eigen::LLT<Matrix> llt(theta);
    if (llt.info() != Eigen::Success) throw DomainError("KKT residual requires a positive-definite matrix");
    const Matrix inv = llt.solve(Matrix::Identity(theta.rows(), theta.cols()));
    return detail::kkt_residual_from_inverse(theta, inv, S, lambda * W.values());
}

/// Weighted graphical lasso:
///   maximize log det T - tr(S T) - lambda * sum_{i != j} w_ij |T_ij|
/// solved by a proximal Newton method. Each Newton direction is found by
/// cyclic coordinate descent on the quadratic model restricted to the free
/// set; the step is backtracked until the iterate stays positive definite
/// and the Armijo condition holds. The diagonal is never penalized.
inline GlassoResult weighted_glasso(const Matrix& S, const WeightMatrix& W, double lambda, double tol = 1e-5,
                                    int max_iter = 1000, const Precision* warm_start = nullptr)
{
    detail::validate_covariance(S);
    const Index n = S.rows();
    if (W.size() != n) throw InputError("weight matrix size does not match the covariance");
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
    if (!(tol > 0.0) || max_iter < 1) throw ConfigError("glasso tolerance and iteration cap must be positive");

    const Matrix penalty = lambda * W.values();

    Matrix X(n, n);
    if (warm_start != nullptr) {
        if (warm_start->size() != n) throw InputError("warm start size does not match the covariance");
        X = warm_start->values();
    } else {
        X = S.diagonal().cwiseInverse().asDiagonal();
    }

    Eigen::LLT<Matrix> llt(X);
    if (llt.info() != Eigen::Success) throw InternalError("initial iterate is not positive definite");

    auto smooth_part = [&](const Eigen::LLT<Matrix>& f, const Matrix& Y) {
        const double logdet = 2.0 * f.matrixLLT().diagonal().array().log().sum();
        return -logdet + S.cwiseProduct(Y).sum();
    };

    double fval = smooth_part(llt, X) + detail::weighted_abs_sum(X, penalty);
    std::vector<double> trace{-fval};

    Matrix Winv = llt.solve(Matrix::Identity(n, n));
    Matrix D(n, n);
    Matrix WD(n, n); // W * D, columns updated incrementally
    std::vector<std::pair<Index, Index>> free_set;
    free_set.reserve(static_cast<std::size_t>(n * (n + 1) / 2));

    constexpr double kArmijo = 1e-3;
    constexpr int kMaxHalvings = 60;

    double kkt = detail::kkt_residual_from_inverse(X, Winv, S, penalty);
    int iter = 0;
    while (kkt > tol && iter < max_iter) {
        ++iter;
        free_set.clear();
        for (Index j = 0; j < n; ++j) {
            for (Index i = 0; i <= j; ++i) {
                const double g = S(i, j) - Winv(i, j);
                if (i == j || X(i, j) != 0.0 || std::abs(g) > penalty(i, j)) free_set.emplace_back(i, j);
            }
        }

        D.setZero();
        WD.setZero();
        const int sweeps = 1 + iter / 3;
        for (int sweep = 0; sweep < sweeps; ++sweep) {
            for (const auto& [i, j] : free_set) {
                // (W D W)_ij = row j of W D dotted with column i of W
                const double wdw = WD.row(j).transpose().dot(Winv.col(i));
                const double b = S(i, j) - Winv(i, j) + wdw;
                if (i == j) {
                    const double a = Winv(i, i) * Winv(i, i);
                    const double mu = -b / a;
                    if (mu == 0.0) continue;
                    D(i, i) += mu;
                    WD.col(i) += mu * Winv.col(i);
                } else {
                    const double a = Winv(i, j) * Winv(i, j) + Winv(i, i) * Winv(j, j);
                    const double cur = X(i, j) + D(i, j);
                    const double mu = -cur + detail::soft_threshold(cur - b / a, penalty(i, j) / a);
                    if (mu == 0.0) continue;
                    D(i, j) += mu;
                    D(j, i) += mu;
                    WD.col(j) += mu * Winv.col(i);
                    WD.col(i) += mu * Winv.col(j);
                }
            }
        }

        const Matrix grad = S - Winv;
        const double l1_now = detail::weighted_abs_sum(X, penalty);
        const double delta = grad.cwiseProduct(D).sum() + detail::weighted_abs_sum(X + D, penalty) - l1_now;

        double alpha = 1.0;
        bool accepted = false;
        bool ever_pd = false;
        Matrix candidate(n, n);
        for (int h = 0; h < kMaxHalvings; ++h, alpha *= 0.5) {
            candidate = X + alpha * D;
            llt.compute(candidate);
            if (llt.info() != Eigen::Success) continue;
            ever_pd = true;
            const double fnew = smooth_part(llt, candidate) + detail::weighted_abs_sum(candidate, penalty);
            if (fnew <= fval + kArmijo * alpha * delta) {
                X = candidate;
                fval = fnew;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (!ever_pd) {
                std::ostringstream msg;
                msg << "weighted_glasso: iterate lost positive definiteness at Newton step " << iter
                    << " (kkt residual " << kkt << ", directional derivative " << delta << ")";
                throw InternalError(msg.str());
            }
            // No sufficient decrease at working precision; keep the last iterate.
            break;
        }
        trace.push_back(-fval);
        Winv = llt.solve(Matrix::Identity(n, n));
        Winv = detail::symmetrized(Winv);
        kkt = detail::kkt_residual_from_inverse(X, Winv, S, penalty);
    }

    return GlassoResult{Precision(X), -fval, kkt, iter, kkt <= tol, std::move(trace)};
}

/// Edge indicator of a precision matrix: A_ij = 1 iff i != j and
/// |theta_ij| > threshold.
inline Matrix support(const Precision& theta, double threshold = 0.0)
{
    const Index n = theta.size();
    Matrix A = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i)
            if (i != j && std::abs(theta(i, j)) > threshold) A(i, j) = 1.0;
    return A;
}

} // namespace cpgraph
