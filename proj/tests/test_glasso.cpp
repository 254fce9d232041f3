#include <gtest/gtest.h>

#include <cmath>

#include <cpgraph/glasso.hpp>
#include <cpgraph/model.hpp>
#include <cpgraph/random.hpp>
#include <cpgraph/synth.hpp>

#include "oracles.hpp"

using namespace cpgraph;

namespace {

Matrix sample_covariance(Index n, Index d, std::uint64_t seed)
{
    const CoreScores c = planted_core_scores(n, std::max<Index>(1, n / 4), 0.45, n / 8.0, seed);
    const SyntheticInstance inst = sample_instance(n, d, c, 20.0, 0.0, nullptr, seed);
    return empirical_covariance(inst.X);
}

WeightMatrix random_weights(Index n, std::uint64_t seed)
{
    Rng rng(seed);
    Matrix w = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < j; ++i) w(i, j) = w(j, i) = 0.05 + rng.uniform();
    return WeightMatrix(w, 0.05);
}

bool nondecreasing(const std::vector<double>& v, double slack)
{
    for (std::size_t k = 1; k < v.size(); ++k)
        if (v[k] < v[k - 1] - slack) return false;
    return true;
}

} // namespace

TEST(WeightedGlasso, LargePenaltyGivesInverseDiagonal)
{
    Matrix S(3, 3);
    S << 2.0, 0.3, -0.1, 0.3, 1.0, 0.2, -0.1, 0.2, 0.5;
    const GlassoResult r = weighted_glasso(S, WeightMatrix::uniform(3), 100.0);
    ASSERT_TRUE(r.converged);
    Matrix expected = Matrix::Zero(3, 3);
    expected.diagonal() << 0.5, 1.0, 2.0;
    EXPECT_TRUE(r.theta.values().isApprox(expected, 1e-12));
    EXPECT_EQ(support(r.theta).sum(), 0.0);
}

TEST(WeightedGlasso, VanishingPenaltyInvertsCovariance)
{
    const Matrix S = sample_covariance(8, 400, 3);
    const GlassoResult r = weighted_glasso(S, WeightMatrix::uniform(8), 1e-10, 1e-9);
    EXPECT_LE(r.kkt_residual, 1e-9);
    ASSERT_TRUE(r.converged);
    const Matrix inv = S.inverse();
    EXPECT_LE((r.theta.values() - inv).cwiseAbs().maxCoeff() / inv.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(WeightedGlasso, ZeroWeightsInvertCovariance)
{
    const Matrix S = sample_covariance(6, 300, 4);
    const GlassoResult r = weighted_glasso(S, WeightMatrix(Matrix::Zero(6, 6)), 0.5, 1e-9);
    ASSERT_TRUE(r.converged);
    EXPECT_TRUE(r.theta.values().isApprox(S.inverse(), 1e-7));
}

TEST(WeightedGlasso, TwoByTwoMatchesGoldenSection)
{
    Matrix S(2, 2);
    S << 1.0, 0.6, 0.6, 1.0;
    const GlassoResult r = weighted_glasso(S, WeightMatrix::uniform(2), 0.1, 1e-10);
    ASSERT_TRUE(r.converged);
    const Matrix ref = oracle::glasso_2x2_golden(1.0, 0.6, 1.0, 0.1);
    EXPECT_LE((r.theta.values() - ref).cwiseAbs().maxCoeff(), 1e-6);
    // the off-diagonal of the inverse shrinks by lambda * w
    EXPECT_NEAR(r.theta.values().inverse()(0, 1), 0.5, 1e-8);
}

TEST(WeightedGlasso, KktCertificateIsRecomputable)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Matrix S = sample_covariance(15, 150, seed);
        const WeightMatrix W = random_weights(15, 50 + seed);
        const GlassoResult r = weighted_glasso(S, W, 0.05);
        ASSERT_TRUE(r.converged);
        const double kkt = glasso_kkt_residual(r.theta.values(), S, W, 0.05);
        EXPECT_LE(kkt, 1e-5);
        EXPECT_NEAR(kkt, r.kkt_residual, 1e-9);
        EXPECT_TRUE(nondecreasing(r.objective_trace, 1e-12));
        EXPECT_NEAR(r.objective, penalized_log_likelihood(r.theta.values(), S, W.values(), 0.05), 1e-9);
    }
}

TEST(WeightedGlasso, ScaleConsistency)
{
    const Matrix S = sample_covariance(10, 200, 8);
    const WeightMatrix W = random_weights(10, 9);
    const WeightMatrix half(0.5 * W.values(), 0.0);
    const GlassoResult a = weighted_glasso(S, W, 0.04, 1e-9);
    const GlassoResult b = weighted_glasso(S, half, 0.08, 1e-9);
    EXPECT_LE((a.theta.values() - b.theta.values()).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(WeightedGlasso, PermutationEquivariance)
{
    const Index n = 9;
    const Matrix S = sample_covariance(n, 200, 10);
    const WeightMatrix W = random_weights(n, 11);
    Eigen::PermutationMatrix<Eigen::Dynamic> P(n);
    P.indices() << 4, 7, 0, 2, 8, 1, 6, 3, 5;
    const GlassoResult a = weighted_glasso(S, W, 0.05, 1e-9);
    const GlassoResult b =
        weighted_glasso(P * S * P.transpose(), WeightMatrix(P * W.values() * P.transpose(), 0.05), 0.05, 1e-9);
    EXPECT_LE((P * a.theta.values() * P.transpose() - b.theta.values()).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(WeightedGlasso, WarmStartKeepsSolution)
{
    const Matrix S = sample_covariance(12, 200, 12);
    const WeightMatrix W = random_weights(12, 13);
    const double tol = 1e-6;
    const GlassoResult cold = weighted_glasso(S, W, 0.05, tol);
    const GlassoResult warm = weighted_glasso(S, W, 0.05, tol, 1000, &cold.theta);
    EXPECT_TRUE(warm.converged);
    EXPECT_LE(warm.iterations, 1);
    EXPECT_LE((cold.theta.values() - warm.theta.values()).cwiseAbs().maxCoeff(), 10 * tol);

    // a warm start from a nearby problem converges to that problem's solution
    const GlassoResult other = weighted_glasso(S, W, 0.08, tol);
    const GlassoResult moved = weighted_glasso(S, W, 0.05, tol, 1000, &other.theta);
    EXPECT_LE((cold.theta.values() - moved.theta.values()).cwiseAbs().maxCoeff(), 10 * tol);
}

TEST(WeightedGlasso, IterationCapReportsNotConverged)
{
    const Matrix S = sample_covariance(12, 100, 14);
    const GlassoResult r = weighted_glasso(S, WeightMatrix::uniform(12), 0.01, 1e-12, 1);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.iterations, 1);
}

TEST(WeightedGlasso, InputErrors)
{
    Matrix S = Matrix::Identity(3, 3);
    S(1, 1) = 0.0;
    EXPECT_THROW(weighted_glasso(S, WeightMatrix::uniform(3), 0.1), InputError);
    EXPECT_THROW(weighted_glasso(Matrix::Identity(3, 3), WeightMatrix::uniform(4), 0.1), InputError);
    EXPECT_THROW(weighted_glasso(Matrix::Identity(3, 3), WeightMatrix::uniform(3), 0.0), ConfigError);
}

TEST(Support, Cases)
{
    EXPECT_EQ(support(Precision(Matrix::Identity(4, 4))), Matrix::Zero(4, 4));
    Matrix t = Matrix::Identity(3, 3);
    t(0, 2) = t(2, 0) = -0.5;
    const Matrix a = support(Precision(t), 0.1);
    EXPECT_EQ(a.sum(), 2.0);
    EXPECT_EQ(a(0, 2), 1.0);
    EXPECT_EQ(a(2, 0), 1.0);
    EXPECT_EQ(support(Precision(t), 0.6), Matrix::Zero(3, 3));
}
