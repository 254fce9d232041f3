#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cpgraph/model.hpp>
#include <cpgraph/random.hpp>
#include <cpgraph/synth.hpp>

using namespace cpgraph;

TEST(Rng, FixedSequence)
{
    Rng a(42), b(42);
    for (int k = 0; k < 100; ++k) {
        EXPECT_EQ(a.uniform(), b.uniform());
        EXPECT_EQ(a.normal(), b.normal());
    }
    Rng c(1);
    for (int k = 0; k < 1000; ++k) {
        const double u = c.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        EXPECT_LT(c.below(7), 7u);
    }
}

TEST(Rng, NormalMoments)
{
    Rng rng(3);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double z = rng.normal();
        s += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(SampleCoordinates, TwoPoints)
{
    const Coordinates xy = sample_coordinates(2, 5);
    EXPECT_EQ(xy.dist(0, 0), 0.0);
    EXPECT_EQ(xy.dist(1, 1), 0.0);
    EXPECT_EQ(xy.dist(0, 1), xy.dist(1, 0));
    EXPECT_GT(xy.dist(0, 1), 0.0);
    EXPECT_THROW(sample_coordinates(1, 5), ConfigError);
}

TEST(SampleCoordinates, TriangleInequalityAndReproducibility)
{
    const Index n = 25;
    const Coordinates xy = sample_coordinates(n, 17);
    Rng rng(99);
    for (int t = 0; t < 50; ++t) {
        const Index i = static_cast<Index>(rng.below(n));
        const Index j = static_cast<Index>(rng.below(n));
        const Index k = static_cast<Index>(rng.below(n));
        EXPECT_LE(xy.dist(i, k), xy.dist(i, j) + xy.dist(j, k) + 1e-15);
    }
    EXPECT_TRUE(xy.dist.offdiagonal_positive());
    const Coordinates again = sample_coordinates(n, 17);
    EXPECT_EQ(xy.points, again.points);
    EXPECT_EQ(xy.dist.values(), again.dist.values());
}

TEST(PlantedCoreScores, TwoLevels)
{
    const CoreScores c = planted_core_scores(40, 10, 0.49, 5.0, 3);
    EXPECT_NEAR(c.values().sum(), 5.0, 1e-12);
    Index core = 0;
    for (Index i = 0; i < 40; ++i) core += c[i] == 0.49;
    EXPECT_EQ(core, 10);
    EXPECT_NEAR(c.values().minCoeff(), (5.0 - 4.9) / 30.0, 1e-15);
    EXPECT_THROW(planted_core_scores(10, 5, 0.49, 1.0, 1), ConfigError);
}

TEST(SampleInstance, HugePenaltyGivesScaledIdentity)
{
    const CoreScores zero(Vector::Zero(6), 0.0);
    const SyntheticInstance inst = sample_instance(6, 20000, zero, 1e6, 0.0, nullptr, 4);
    const Matrix& t = inst.theta_true.values();
    Matrix off = t;
    off.diagonal().setZero();
    EXPECT_LE(off.cwiseAbs().maxCoeff(), 1e-4);
    for (Index i = 0; i < 6; ++i) EXPECT_NEAR(t(i, i), 0.1, 1e-4);
    const Matrix S = empirical_covariance(inst.X);
    for (Index i = 0; i < 6; ++i) EXPECT_NEAR(S(i, i), 10.0, 0.5);
}

TEST(SampleInstance, CorePairsHaveLargerMagnitudes)
{
    const Index n = 40;
    double core_sum = 0.0, peri_sum = 0.0;
    Index core_n = 0, peri_n = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const CoreScores c = planted_core_scores(n, n / 4, 0.49, n / 8.0, seed);
        const SyntheticInstance inst = sample_instance(n, 10, c, 50.0, 0.0, nullptr, seed);
        for (Index j = 0; j < n; ++j)
            for (Index i = 0; i < j; ++i) {
                const double v = std::abs(inst.theta_true(i, j));
                if (c[i] == 0.49 && c[j] == 0.49) {
                    core_sum += v;
                    ++core_n;
                } else if (c[i] != 0.49 && c[j] != 0.49) {
                    peri_sum += v;
                    ++peri_n;
                }
            }
    }
    EXPECT_GT(core_sum / static_cast<double>(core_n), peri_sum / static_cast<double>(peri_n));
}

TEST(SampleInstance, Deterministic)
{
    const CoreScores c = planted_core_scores(10, 2, 0.4, 1.25, 7);
    const SyntheticInstance a = sample_instance(10, 50, c, 20.0, 0.0, nullptr, 7);
    const SyntheticInstance b = sample_instance(10, 50, c, 20.0, 0.0, nullptr, 7);
    EXPECT_EQ(a.theta_true.values(), b.theta_true.values());
    EXPECT_EQ(a.X.values(), b.X.values());
    const SyntheticInstance other = sample_instance(10, 50, c, 20.0, 0.0, nullptr, 8);
    EXPECT_NE(a.X.values(), other.X.values());
}

TEST(SampleInstance, EmpiricalLaplaceScale)
{
    Vector cv(2);
    cv << 0.3, 0.2;
    const CoreScores c(cv, 0.5);
    const double lambda = 4.0;
    const double w = 1.0 - 0.3 - 0.2;
    SampleOptions opts;
    opts.sparsify_at = 0.0;
    double sum = 0.0;
    const int reps = 10000;
    for (int k = 0; k < reps; ++k)
        sum += std::abs(sample_instance(2, 1, c, lambda, 0.0, nullptr, static_cast<std::uint64_t>(k), opts).theta_true(0, 1));
    const double expected = 1.0 / (lambda * w);
    EXPECT_NEAR(sum / reps, expected, 0.05 * expected);
}

TEST(SampleInstance, PositiveDefiniteAndSparsified)
{
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const CoreScores c = planted_core_scores(15, 3, 0.45, 15 / 8.0, seed);
        const SyntheticInstance inst = sample_instance(15, 5, c, 10.0, 0.0, nullptr, seed);
        Eigen::LLT<Matrix> llt(inst.theta_true.values());
        EXPECT_EQ(llt.info(), Eigen::Success);
        Index zeros = 0;
        for (Index j = 0; j < 15; ++j)
            for (Index i = 0; i < j; ++i) zeros += inst.theta_true(i, j) == 0.0;
        // the 30th percentile of 105 magnitudes zeroes 31 entries
        EXPECT_EQ(zeros, 31);
        for (Index i = 0; i < 15; ++i) {
            double off = 0.0;
            for (Index j = 0; j < 15; ++j)
                if (j != i) off += std::abs(inst.theta_true(i, j));
            EXPECT_NEAR(inst.theta_true(i, i), off + 0.1, 1e-12);
        }
    }
}

TEST(SampleInstance, CovarianceConvergesWithSamples)
{
    const CoreScores c = planted_core_scores(10, 2, 0.45, 1.25, 5);
    double small = 0.0, large = 0.0;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const SyntheticInstance a = sample_instance(10, 1000, c, 20.0, 0.0, nullptr, seed);
        const SyntheticInstance b = sample_instance(10, 4000, c, 20.0, 0.0, nullptr, seed);
        const Matrix cov = a.theta_true.values().inverse();
        small += (empirical_covariance(a.X) - cov).cwiseAbs().maxCoeff();
        large += (empirical_covariance(b.X) - cov).cwiseAbs().maxCoeff();
    }
    // error ratio is 2 under 1/sqrt(d) scaling
    EXPECT_GT(small / large, 1.5);
}

TEST(SampleInstance, Errors)
{
    const CoreScores c = CoreScores::uniform(4, 0.5);
    SampleOptions opts;
    opts.pd_margin = 0.0;
    EXPECT_THROW(sample_instance(4, 10, c, 1.0, 0.0, nullptr, 1, opts), ConfigError);
    EXPECT_THROW(sample_instance(4, 10, c, 1.0, 0.09, nullptr, 1), ConfigError);
    EXPECT_THROW(sample_instance(5, 10, c, 1.0, 0.0, nullptr, 1), ConfigError);
    // minimal instance
    EXPECT_NO_THROW(sample_instance(2, 1, CoreScores::uniform(2, 0.25), 1.0, 0.0, nullptr, 1));
}
