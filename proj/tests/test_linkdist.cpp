#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include "mnf/linkdist.hpp"
#include "mnf/parallel.hpp"
#include "mnf/walk.hpp"

using namespace mnf;

namespace {

SchedulePtr default_schedule()
{
    static SchedulePtr s = make_schedule(1.0, 1'000'000'000'000ULL);
    return s;
}

double boost_pmf(std::uint64_t a, std::int64_t d)
{
    boost::math::binomial_distribution<double> law(static_cast<double>(a), 0.5);
    return boost::math::pdf(law, static_cast<double>((static_cast<std::int64_t>(a) + d) / 2));
}

// Sum of pi(a) Pr{X(a)=d} over admissible ages up to m, with Boost's pmf, and
// a bound on the ages beyond m: pi(a) <= pi(m) m ln^2 m / (a ln^2 a) and
// Pr{X(a)=d} <= sqrt(2/(pi (a-1))) per coordinate.
struct Bracket
{
    double lo = 0;
    double hi = 0;
};
Bracket series_oracle(Displacement const& d, ForgettingSchedule const& s, std::uint64_t m)
{
    std::int64_t const parity = std::llabs(d[0]) % 2;
    std::uint64_t const start = static_cast<std::uint64_t>(linf_norm(d));
    long double sum = 0;
    for (std::uint64_t a = start; a <= m; ++a)
    {
        if (static_cast<std::int64_t>(a % 2) != parity)
            continue;
        double p = s.pi(a);
        for (auto v : d.x)
            p *= boost_pmf(a, v);
        sum += p;
    }
    int const k = d.dims();
    double const lm = std::log(static_cast<double>(m));
    double const envelope = s.pi(m) * static_cast<double>(m) * lm * lm;
    // sum_{a > m} envelope / (a ln^2 a) (2/(pi (a-1)))^{k/2}
    //   <= envelope (2/pi)^{k/2} / ln^2 m * int_{m-1}^inf x^{-1-k/2} dx
    double const rest = envelope * std::pow(2 / M_PI, 0.5 * k) / (lm * lm)
                        * (2.0 / k) * std::pow(static_cast<double>(m - 1), -0.5 * k);
    return {static_cast<double>(sum), static_cast<double>(sum) + rest};
}

}  // namespace

TEST(LinkLaw, ParityZeroSet)
{
    auto const s = default_schedule();
    EXPECT_FALSE(parity_admissible(Displacement{1, 2}));
    EXPECT_TRUE(parity_admissible(Displacement{-3, 5}));
    LinkValue const v = f_exact(Displacement{1, 2}, *s);
    EXPECT_EQ(v.value, 0.0);
    EXPECT_EQ(v.error, 0.0);
    for (auto const& d : {Displacement{64, 3}, Displacement{0, 1}, Displacement{2, 2, 7}})
        EXPECT_EQ(f_exact(d, *s).value, 0.0);
}

TEST(LinkLaw, OriginLowerBound)
{
    auto const s = default_schedule();
    LinkValue const v = f_exact(Displacement{0}, *s);
    EXPECT_GE(v.value, 1.5 * s->c_norm());
    EXPECT_LT(v.error, 1e-6 * v.value);
}

TEST(LinkLaw, SeriesOracle)
{
    // Direct summation with an independent pmf to 4e6; the remainder is bounded
    // by the harmonic envelope. f_exact +/- its error must overlap the bracket.
    auto const s = default_schedule();
    for (auto const& d : {Displacement{0}, Displacement{2}, Displacement{-64}, Displacement{2, 4},
                          Displacement{5, -1}})
    {
        Bracket const b = series_oracle(d, *s, 4'000'000);
        LinkValue const v = f_exact(d, *s);
        EXPECT_GE(v.value + v.error, b.lo * (1 - 1e-12)) << to_string(d);
        EXPECT_LE(v.value - v.error, b.hi * (1 + 1e-12)) << to_string(d);
        EXPECT_LE(v.error, s->tail_mass()) << to_string(d);
    }
}

TEST(LinkLaw, Symmetry)
{
    auto const s = default_schedule();
    EXPECT_EQ(f_exact(Displacement{128}, *s).value, f_exact(Displacement{-128}, *s).value);
    EXPECT_EQ(f_exact(Displacement{6, -4}, *s).value, f_exact(Displacement{-4, 6}, *s).value);
    EXPECT_EQ(scaled_link_ratio(Displacement{256}, *s), scaled_link_ratio(Displacement{-256}, *s));
}

TEST(LinkLaw, TotalMassAtMostOne)
{
    auto const s = default_schedule();
    double total = 0;
    for (std::int64_t d = -300; d <= 300; ++d)
    {
        LinkValue const v = f_exact(Displacement{d}, *s);
        ASSERT_GE(v.value, 0.0);
        total += v.value + v.error;
    }
    EXPECT_LE(total, 1.0);
    EXPECT_GT(total, 0.5);
}

TEST(LinkLaw, OutOfRange)
{
    auto const s = make_schedule(1.0, 1000);
    EXPECT_THROW(f_exact(Displacement{1002}, *s), std::out_of_range);
}

TEST(SampleLink, MassAtOriginMatchesSeries)
{
    auto const s = default_schedule();
    Rng rng(derive_seed(1, Stream::link_sampling, 0));
    int const n = 1'000'000;
    int zero = 0;
    for (int i = 0; i < n; ++i)
        zero += sample_link(*s, 1, rng).is_zero();
    LinkValue const v = f_exact(Displacement{0}, *s);
    double const p = v.value / s->truncated_mass();
    EXPECT_NEAR(zero / double(n), p, 3 * std::sqrt(p * (1 - p) / n) + v.error);
}

TEST(SampleLink, ParityInTwoDimensions)
{
    auto const s = default_schedule();
    Rng rng(3);
    for (int i = 0; i < 100'000; ++i)
        ASSERT_TRUE(parity_admissible(sample_link(*s, 2, rng)));
}

TEST(Harmonic, SmallTorusNormalization)
{
    HarmonicBaseline const h(LatticeConfig(1, 8));
    double z = 0;
    for (int d = -3; d <= 4; ++d)
        if (d != 0)
            z += 1.0 / std::abs(d);
    EXPECT_NEAR(h.normalization(), 1 / z, 1e-15);
    EXPECT_THROW(h.weight(Displacement{0}), std::invalid_argument);
}

TEST(Harmonic, WeightsByLinfNorm)
{
    HarmonicBaseline const h(LatticeConfig(2, 64));
    EXPECT_EQ(h.probability(Displacement{5, -2}), h.probability(Displacement{-1, 5}));
    EXPECT_NEAR(h.weight(Displacement{3, 1}) / h.weight(Displacement{6, 2}), 4.0, 1e-14);
    HarmonicBaseline const h3(LatticeConfig(3, 64));
    EXPECT_NEAR(h3.weight(Displacement{3, 1, 0}) / h3.weight(Displacement{6, 2, 0}), 8.0, 1e-13);
}

TEST(Harmonic, EnumerationAndSampler)
{
    // k=2, L=8: 63 nonzero displacements. Probabilities sum to one and the
    // sampler passes a chi-square test against them.
    LatticeConfig const cfg(2, 8);
    HarmonicBaseline const h(cfg);
    std::map<Displacement, double> law;
    double total = 0;
    for (std::int64_t x = -3; x <= 4; ++x)
        for (std::int64_t y = -3; y <= 4; ++y)
            if (x != 0 || y != 0)
                total += law[Displacement{x, y}] = h.probability(Displacement{x, y});
    EXPECT_NEAR(total, 1.0, 1e-14);
    for (std::int64_t r = 1; r <= 4; ++r)
    {
        int count = 0;
        for (auto const& [d, p] : law)
            count += linf_norm(d) == r;
        EXPECT_EQ(h.shell_size(r), count);
    }

    Rng rng(17);
    int const n = 300'000;
    std::map<Displacement, int> seen;
    for (int i = 0; i < n; ++i)
    {
        Displacement d = h.sample(rng);
        ASSERT_TRUE(law.count(d)) << to_string(d);
        ++seen[d];
    }
    double chi2 = 0;
    for (auto const& [d, p] : law)
    {
        double const e = n * p;
        chi2 += (seen[d] - e) * (seen[d] - e) / e;
    }
    boost::math::chi_squared dist(static_cast<double>(law.size() - 1));
    EXPECT_LT(chi2, boost::math::quantile(boost::math::complement(dist, 1e-3)));
}

TEST(TailBracket, ContainsDirectSum)
{
    for (auto [k, eps, n] : {std::tuple{1, 1.0, 10'000.0}, std::tuple{2, 1.0, 1000.0},
                             std::tuple{1, 0.5, 1000.0}, std::tuple{2, 0.5, 10'000.0}})
    {
        TailBracket const b = tail_bracket(n, k, eps);
        EXPECT_LE(b.lower, b.upper);
        std::uint64_t const m = 20'000'000;
        long double s = 0;
        for (std::uint64_t a = static_cast<std::uint64_t>(n); a <= m; ++a)
        {
            long double const x = static_cast<long double>(a);
            s += std::pow(x, -1.0L - k / 2.0L) * std::pow(std::log(x), -1.0L - eps);
        }
        double const lm = std::log(double(m));
        double const rest = (2.0 / k) * std::pow(double(m), -k / 2.0) / std::pow(lm, 1 + eps);
        EXPECT_GE(static_cast<double>(s), b.lower) << k << ' ' << eps << ' ' << n;
        EXPECT_LE(static_cast<double>(s) + rest, b.upper) << k << ' ' << eps << ' ' << n;
    }
    EXPECT_THROW(tail_bracket(10, 1, 1.0), std::domain_error);
}

TEST(ScaledLinkRatio, DomainAndBand)
{
    auto const s = default_schedule();
    EXPECT_THROW(scaled_link_ratio(Displacement{32}, *s), std::domain_error);
    EXPECT_THROW(scaled_link_ratio(Displacement{65, 64}, *s), std::domain_error);
    double lo = 1e300, hi = 0;
    for (std::int64_t d = 64; d <= 4096; d *= 2)
    {
        double const r = scaled_link_ratio(Displacement{d}, *s);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LE(hi / lo, std::sqrt(std::log(4096.0)) * 2);
}

TEST(LinkTable, ConcurrentProbesAndCsv)
{
    LinkLengthTable table(default_schedule(), 1);
    std::vector<Displacement> probes;
    for (std::int64_t d = 0; d < 40; ++d)
        probes.push_back(Displacement{d % 20});
    parallel_for(probes.size(), 4, [&](std::size_t i) { table.probe(probes[i]); });
    EXPECT_EQ(table.size(), 20u);
    EXPECT_EQ(table.probe(Displacement{4}).value, f_exact(Displacement{4}, *default_schedule()).value);
    EXPECT_GE(table.truncation_error(), 0.0);
    std::ostringstream os;
    table.write_csv(os);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "k,epsilon,d_1,f,err");
    EXPECT_THROW(table.probe(Displacement{1, 1}), std::invalid_argument);
}
