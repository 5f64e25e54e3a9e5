#include "baryopt/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"

using baryopt::beta_sample;
using baryopt::CounterRng;
using baryopt::gamma_sample;
using baryopt::normal;
using baryopt::uniform_double;
using baryopt::vmf_cosine;

TEST(CounterRng, SameSeedSameStream) {
    CounterRng a(42, 7), b(42, 7);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(a(), b());
}

TEST(CounterRng, DistinctStreamsDiffer) {
    CounterRng a(42, 0), b(42, 1), c(43, 0);
    int same_ab = 0, same_ac = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a();
        if (x == b()) ++same_ab;
        if (x == c()) ++same_ac;
    }
    EXPECT_EQ(same_ab, 0);
    EXPECT_EQ(same_ac, 0);
}

TEST(Distributions, UniformRangeAndMean) {
    CounterRng rng(1);
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = uniform_double(rng);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    const double se = 1.0 / std::sqrt(12.0 * n);
    EXPECT_NEAR(sum / n, 0.5, 5.0 * se);
}

TEST(Distributions, NormalMoments) {
    CounterRng rng(2);
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0, sabs = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = normal(rng);
        s1 += x;
        s2 += x * x;
        sabs += std::abs(x);
    }
    EXPECT_NEAR(s1 / n, 0.0, 5.0 / std::sqrt(static_cast<double>(n)));
    EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(sabs / n, std::sqrt(2.0 / std::acos(-1.0)), 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Distributions, GammaMeanVariance) {
    CounterRng rng(3);
    const double shape = 2.5;
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = gamma_sample(rng, shape);
        s1 += x;
        s2 += x * x;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    EXPECT_NEAR(mean, shape, 5.0 * std::sqrt(shape / n));
    EXPECT_NEAR(var, shape, 0.05 * shape);
}

TEST(Distributions, BetaHalfHalfArcsineLaw) {
    CounterRng rng(4);
    const int n = 200000;
    double sum = 0.0;
    int below_quarter = 0;
    for (int i = 0; i < n; ++i) {
        const double x = beta_sample(rng, 0.5, 0.5);
        sum += x;
        if (x < 0.25) ++below_quarter;
    }
    EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(0.125 / n));
    // arcsine CDF at 1/4 is exactly 1/3
    EXPECT_NEAR(static_cast<double>(below_quarter) / n, 1.0 / 3.0,
                5.0 * std::sqrt(2.0 / 9.0 / n));
}

TEST(VmfCosine, MatchesLangevinMeanOnS2) {
    // E[t] = coth(kappa) - 1/kappa for the sphere in R^3
    CounterRng rng(5);
    const double kappa = 20.0;
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += vmf_cosine(rng, kappa, 3);
    const double expected = 1.0 / std::tanh(kappa) - 1.0 / kappa;
    EXPECT_NEAR(sum / n, expected, 5.0 / (kappa * std::sqrt(static_cast<double>(n))));
}

TEST(VmfCosine, MatchesQuadratureMeanInR5) {
    CounterRng rng(6);
    const double kappa = 4.0;
    const int p = 5;
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = vmf_cosine(rng, kappa, p);
        sum += t;
        sum2 += t * t;
    }
    auto dens = [&](double t) { return std::exp(kappa * (t - 1.0)) * std::pow(1.0 - t * t, 0.5 * (p - 3)); };
    const double z = oracles::adaptive_simpson(dens, -1.0, 1.0, 1e-13);
    const double m1 = oracles::adaptive_simpson([&](double t) { return t * dens(t); }, -1.0, 1.0, 1e-13) / z;
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    EXPECT_NEAR(mean, m1, 5.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST(VmfCosine, HighConcentrationStaysLocal) {
    CounterRng rng(7);
    const int n = 20000;
    double mean_dist = 0.0;
    for (int i = 0; i < n; ++i) mean_dist += std::acos(vmf_cosine(rng, 1e4, 3));
    mean_dist /= n;
    EXPECT_LT(mean_dist, 0.05);
}

TEST(VmfCosine, ZeroConcentrationIsUniform) {
    CounterRng rng(8);
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += vmf_cosine(rng, 0.0, 3);
    EXPECT_NEAR(sum / n, 0.0, 5.0 / std::sqrt(3.0 * n));
}
