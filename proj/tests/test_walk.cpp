#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <boost/math/distributions/binomial.hpp>

#include "mnf/stats.hpp"
#include "mnf/walk.hpp"

using namespace mnf;

namespace {

// Pr{X(a) = d} from Boost's binomial law.
double binomial_oracle(std::uint64_t a, std::int64_t d)
{
    if (static_cast<std::uint64_t>(std::llabs(d)) > a || (static_cast<std::int64_t>(a) + d) % 2 != 0)
        return 0;
    boost::math::binomial_distribution<double> law(static_cast<double>(a), 0.5);
    return boost::math::pdf(law, static_cast<double>((static_cast<std::int64_t>(a) + d) / 2));
}

}  // namespace

TEST(WalkStep, OneDimension)
{
    Rng rng(1);
    int const n = 1'000'000;
    int plus = 0;
    double sum = 0;
    for (int i = 0; i < n; ++i)
    {
        Displacement d = walk_step(Displacement{0}, rng);
        ASSERT_TRUE(d[0] == 1 || d[0] == -1);
        plus += d[0] == 1;
        sum += d[0];
    }
    EXPECT_NEAR(plus / double(n), 0.5, 3 * 0.5 / std::sqrt(n));
    EXPECT_LE(std::fabs(sum / n), 3 / std::sqrt(double(n)));
}

TEST(WalkStep, TwoDimensionsDiagonal)
{
    Rng rng(2);
    std::map<Displacement, int> counts;
    int const n = 400'000;
    for (int i = 0; i < n; ++i)
        ++counts[walk_step(Displacement{0, 0}, rng)];
    ASSERT_EQ(counts.size(), 4u);
    for (auto const& [d, c] : counts)
    {
        EXPECT_EQ(std::llabs(d[0]), 1);
        EXPECT_EQ(std::llabs(d[1]), 1);
        EXPECT_NEAR(c / double(n), 0.25, 3 * std::sqrt(0.25 * 0.75 / n));
    }
}

TEST(Pmf, Examples)
{
    EXPECT_DOUBLE_EQ(exact_pmf_1d(1, 1), 0.5);
    EXPECT_DOUBLE_EQ(exact_pmf_1d(2, 0), 0.5);
    EXPECT_DOUBLE_EQ(exact_pmf_1d(4, 2), 0.25);
    EXPECT_EQ(exact_pmf_1d(3, 2), 0.0);
    EXPECT_DOUBLE_EQ(exact_pmf_kd(1, Displacement{1, 1}), 0.25);
    EXPECT_DOUBLE_EQ(exact_pmf_kd(2, Displacement{0, 0}), 0.25);
    EXPECT_EQ(exact_pmf_kd(2, Displacement{1, 0}), 0.0);
    EXPECT_EQ(exact_pmf_1d(0, 0), 1.0);
}

TEST(Pmf, PathEnumeration)
{
    // All 2^a step sequences for a <= 12.
    for (std::uint64_t a = 0; a <= 12; ++a)
    {
        std::map<std::int64_t, double> law;
        for (std::uint64_t mask = 0; mask < (1ULL << a); ++mask)
            law[2 * std::popcount(mask) - static_cast<std::int64_t>(a)] += std::ldexp(1.0, -static_cast<int>(a));
        for (std::int64_t d = -static_cast<std::int64_t>(a) - 2; d <= static_cast<std::int64_t>(a) + 2; ++d)
            EXPECT_NEAR(exact_pmf_1d(a, d), law.count(d) ? law[d] : 0.0, 1e-15) << a << ' ' << d;
    }
}

TEST(Pmf, NormalizationSymmetryParity)
{
    for (std::uint64_t a = 0; a <= 10'000; a += (a < 300 ? 1 : 997))
    {
        CompensatedSum total;
        auto const ai = static_cast<std::int64_t>(a);
        for (std::int64_t d = -ai - 1; d <= ai + 1; ++d)
        {
            double const p = exact_pmf_1d(a, d);
            total.add(p);
            ASSERT_EQ(p, exact_pmf_1d(a, -d));
            bool const zero = (ai + d) % 2 != 0 || std::llabs(d) > ai;
            bool const underflow = !zero && log_pmf_1d(a, d) < -745;
            if (!underflow)
            {
                ASSERT_EQ(p == 0, zero) << a << ' ' << d;
            }
        }
        ASSERT_NEAR(total.value(), 1.0, 1e-12) << a;
    }
}

TEST(Pmf, AgreesWithBinomialOracle)
{
    for (std::uint64_t a : {10ULL, 999ULL, 10'000ULL, 1'000'000ULL, 100'000'000ULL})
    {
        auto const sd = std::sqrt(static_cast<double>(a));
        for (double z : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0})
        {
            auto d = static_cast<std::int64_t>(z * sd);
            if ((static_cast<std::int64_t>(a) + d) % 2 != 0)
                ++d;
            if (d > static_cast<std::int64_t>(a))
                continue;
            double const want = binomial_oracle(a, d);
            ASSERT_GT(want, 0);
            EXPECT_NEAR(exact_pmf_1d(a, d) / want, 1.0, 1e-10) << a << ' ' << d;
            EXPECT_NEAR(log_pmf_1d(a, d), std::log(want), 1e-10) << a << ' ' << d;
        }
    }
    EXPECT_EQ(log_pmf_1d(5, 2), -std::numeric_limits<double>::infinity());
}

TEST(Pmf, DirectProductCrossCheck)
{
    for (std::uint64_t a = 1; a < 1000; a += 37)
        for (std::int64_t d = -static_cast<std::int64_t>(a); d <= static_cast<std::int64_t>(a); d += 3)
        {
            double const x = exact_pmf_1d(a, d), y = exact_pmf_1d_direct(a, d);
            if (y == 0)
            {
                ASSERT_EQ(x, 0.0);
            }
            else if (y > 1e-290)
            {
                ASSERT_NEAR(x / y, 1.0, 1e-12) << a << ' ' << d;
            }
        }
    EXPECT_THROW(exact_pmf_1d_direct(1000, 0), std::invalid_argument);
}

TEST(Pmf, SmoothInterpolationMatchesAtIntegers)
{
    for (std::uint64_t a : {20ULL, 2'000ULL, 2'000'000ULL})
        for (std::int64_t d : {0, 2, 10})
            EXPECT_NEAR(log_pmf_1d_smooth(static_cast<double>(a), static_cast<double>(d)),
                        log_pmf_1d(a, d), 1e-12);
}

TEST(Pmf, ProductLaw)
{
    Displacement const d{4, -2, 0};
    double const want = binomial_oracle(10, 4) * binomial_oracle(10, -2) * binomial_oracle(10, 0);
    EXPECT_NEAR(exact_pmf_kd(10, d) / want, 1.0, 1e-12);
    EXPECT_NEAR(log_pmf_kd(10, d), std::log(want), 1e-12);
}

TEST(SampleDisplacement, Basics)
{
    Rng rng(4);
    for (int k : {1, 3})
        EXPECT_TRUE(sample_displacement(0, k, rng).is_zero());

    int const n = 1'000'000;
    std::map<std::int64_t, int> counts;
    for (int i = 0; i < n; ++i)
        ++counts[sample_displacement(2, 1, rng)[0]];
    ASSERT_EQ(counts.size(), 3u);
    for (auto [d, p] : {std::pair{-2, 0.25}, std::pair{0, 0.5}, std::pair{2, 0.25}})
        EXPECT_NEAR(counts[d] / double(n), p, 3 * std::sqrt(p * (1 - p) / n)) << d;
}

TEST(SampleDisplacement, LargeAgeMatchesChainedSteps)
{
    // 5000 chains of 10^4 steps in k=8 give 40000 coordinate samples.
    int const k = 8, chains = 5000;
    std::uint64_t const a = 10'000;
    Rng rng(6);
    RunningStats chained, direct;
    for (int c = 0; c < chains; ++c)
    {
        Displacement d = Displacement::zero(k);
        for (std::uint64_t t = 0; t < a; ++t)
            d = walk_step(std::move(d), rng);
        for (int i = 0; i < k; ++i)
            chained.add(static_cast<double>(d[i]));
    }
    for (int c = 0; c < chains; ++c)
    {
        Displacement const d = sample_displacement(a, k, rng);
        for (int i = 0; i < k; ++i)
            direct.add(static_cast<double>(d[i]));
    }
    EXPECT_NEAR(direct.variance() / chained.variance(), 1.0, 0.02);
    EXPECT_NEAR(direct.variance() / static_cast<double>(a), 1.0, 0.03);
}

TEST(SampleDisplacement, PopcountAndBinomialPathsAgree)
{
    // a = 64 uses bit counting, a = 66 the binomial sampler; compare variances
    // with the exact a.
    Rng rng(12);
    for (std::uint64_t a : {63ULL, 64ULL, 65ULL, 66ULL, 1000ULL})
    {
        RunningStats st;
        for (int i = 0; i < 200'000; ++i)
        {
            auto const x = sample_displacement(a, 1, rng)[0];
            ASSERT_EQ((static_cast<std::int64_t>(a) + x) % 2, 0);
            st.add(static_cast<double>(x));
        }
        EXPECT_NEAR(st.mean(), 0, 4 * std::sqrt(a / 200'000.0)) << a;
        EXPECT_NEAR(st.variance() / a, 1.0, 0.015) << a;
    }
}

TEST(Chernoff, Examples)
{
    EXPECT_DOUBLE_EQ(chernoff_bound(7, 0), 2.0);
    EXPECT_NEAR(chernoff_bound(100, 80), 2 * std::exp(-2.0), 1e-15);
    EXPECT_THROW(chernoff_bound(0, 0), std::domain_error);
}

TEST(Chernoff, DominatesOnGrid)
{
    for (std::uint64_t a = 1; a <= 400; ++a)
        for (std::int64_t d = -static_cast<std::int64_t>(a); d <= static_cast<std::int64_t>(a); ++d)
            ASSERT_LE(exact_pmf_1d(a, d), chernoff_bound(a, d)) << a << ' ' << d;
}

TEST(LocalClt, Bounds)
{
    std::int64_t const d = 512;
    for (std::uint64_t a : {static_cast<std::uint64_t>(d * d), static_cast<std::uint64_t>(d * d / 2)})
    {
        CltBounds const b = local_clt_bounds(a, d, 0.1);
        EXPECT_LE(b.lower, b.upper);
        double const p = exact_pmf_1d(a, d);
        EXPECT_GE(p, b.lower);
        EXPECT_LE(p, b.upper);
        // Plug-in values.
        double const g = std::sqrt(2 / (M_PI * a));
        EXPECT_NEAR(b.upper, 1.1 * g * std::exp(-double(d) * d / (4.0 * a)), 1e-15);
        EXPECT_NEAR(b.lower, 0.9 * g * std::exp(-3.0 * d * d / (4.0 * a)), 1e-15);
    }
    EXPECT_THROW(local_clt_bounds(10, 512, 0.1), std::domain_error);
    EXPECT_THROW(local_clt_bounds(1000, 1, 0.1), std::domain_error);
    EXPECT_THROW(local_clt_bounds(1'000'000, 512, 0.0), std::domain_error);
}

TEST(LocalClt, ThresholdSearchSmallGrid)
{
    CltThreshold const t = find_clt_threshold(0.1, 512);
    EXPECT_GT(t.points_checked, 0u);
    EXPECT_LE(t.d0, 512);
    EXPECT_EQ(t.d0 % 2, 0);
    EXPECT_LT(t.largest_failure, t.d0);
}

TEST(Stirling, CentralBinomialRatio)
{
    EXPECT_NEAR(central_binomial_ratio(100'000), 1.0, 1e-3);
    // C(2m, m) sqrt(pi m) / 4^m = 1 - 1/(8m) + 1/(128m^2) + O(1/m^3).
    for (std::uint64_t m : {10ULL, 1000ULL, 100'000ULL})
    {
        double const x = static_cast<double>(m);
        EXPECT_NEAR(central_binomial_ratio(m), 1 - 1 / (8 * x) + 1 / (128 * x * x),
                    std::max(0.01 / (x * x * x), 1e-14))
            << m;
    }
}
