#include "mnf/walk.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/random/binomial_distribution.hpp>

namespace mnf {
namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kLnSqrt2Pi = 0.91893853320467274178;  // ln sqrt(2 pi)

//! ln n! - ln(sqrt(2 pi n) (n/e)^n)
double stirlerr(double n)
{
    constexpr double s0 = 1.0 / 12;
    constexpr double s1 = 1.0 / 360;
    constexpr double s2 = 1.0 / 1260;
    constexpr double s3 = 1.0 / 1680;
    constexpr double s4 = 1.0 / 1188;
    if (n <= 15)
        return std::lgamma(n + 1) - (n + 0.5) * std::log(n) + n - kLnSqrt2Pi;
    double const nn = n * n;
    return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
}

//! x ln(x / np) + np - x, without cancellation near x = np.
double bd0(double x, double np)
{
    if (std::fabs(x - np) < 0.1 * (x + np))
    {
        double v = (x - np) / (x + np);
        double s = (x - np) * v;
        double ej = 2 * x * v;
        double const v2 = v * v;
        for (int j = 1; j < 1000; ++j)
        {
            ej *= v2;
            double const s1 = s + ej / (2 * j + 1);
            if (s1 == s)
                return s1;
            s = s1;
        }
        return s;
    }
    return x * std::log(x / np) + np - x;
}

bool on_support(std::uint64_t a, std::int64_t d)
{
    std::uint64_t const ad = static_cast<std::uint64_t>(d < 0 ? -d : d);
    return ad <= a && ((a - ad) & 1u) == 0;
}

}  // namespace

Displacement walk_step(Displacement d, Rng& rng)
{
    std::uint64_t bits = 0;
    for (int i = 0; i < d.dims(); ++i)
    {
        if (i % 64 == 0)
            bits = rng();
        d[i] += (bits & 1u) ? 1 : -1;
        bits >>= 1;
    }
    return d;
}

double log_pmf_1d(std::uint64_t a, std::int64_t d)
{
    if (!on_support(a, d))
        return -std::numeric_limits<double>::infinity();
    d = d < 0 ? -d : d;
    double const n = static_cast<double>(a);
    double const x = static_cast<double>((static_cast<std::int64_t>(a) + d) / 2);
    if (x == 0 || x == n)
        return -n * kLn2;
    return log_pmf_1d_smooth(n, static_cast<double>(d));
}

double log_pmf_1d_smooth(double a, double d)
{
    double const x = 0.5 * (a + d);
    double const y = 0.5 * (a - d);
    if (!(x > 0 && y > 0))
        throw std::domain_error("log_pmf_1d_smooth: need |d| < a");
    double const lc = stirlerr(a) - stirlerr(x) - stirlerr(y) - bd0(x, a / 2) - bd0(y, a / 2);
    double const lf = 2 * kLnSqrt2Pi + std::log(x) + std::log1p(-x / a);
    return lc - 0.5 * lf;
}

double exact_pmf_1d(std::uint64_t a, std::int64_t d)
{
    if (!on_support(a, d))
        return 0.0;
    return std::exp(log_pmf_1d(a, d));
}

double exact_pmf_1d_direct(std::uint64_t a, std::int64_t d)
{
    if (a >= 1000)
        throw std::invalid_argument("exact_pmf_1d_direct: a must be below 1000");
    if (!on_support(a, d))
        return 0.0;
    auto const x = static_cast<std::uint64_t>((static_cast<std::int64_t>(a) + d) / 2);
    std::uint64_t const m = std::min(x, a - x);
    double p = 1;
    int halves = static_cast<int>(a);
    for (std::uint64_t i = 1; i <= m; ++i)
    {
        p *= static_cast<double>(a - m + i) / static_cast<double>(i);
        while (p > 1 && halves > 0)
        {
            p *= 0.5;
            --halves;
        }
    }
    return std::ldexp(p, -halves);
}

double log_pmf_kd(std::uint64_t a, Displacement const& d)
{
    double s = 0;
    for (auto v : d.x)
        s += log_pmf_1d(a, v);
    return s;
}

double exact_pmf_kd(std::uint64_t a, Displacement const& d)
{
    double p = 1;
    for (auto v : d.x)
        p *= exact_pmf_1d(a, v);
    return p;
}

Displacement sample_displacement(std::uint64_t a, int k, Rng& rng)
{
    Displacement d = Displacement::zero(k);
    auto const sa = static_cast<std::int64_t>(a);
    if (a == 0)
        return d;
    if (a <= 64)
    {
        std::uint64_t const mask = a == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << a) - 1;
        for (int i = 0; i < k; ++i)
            d[i] = 2 * std::popcount(rng() & mask) - sa;
        return d;
    }
    boost::random::binomial_distribution<std::int64_t, double> heads(sa, 0.5);
    for (int i = 0; i < k; ++i)
        d[i] = 2 * heads(rng) - sa;
    return d;
}

double chernoff_bound(std::uint64_t a, std::int64_t d)
{
    if (a == 0)
        throw std::domain_error("chernoff_bound: age must be positive");
    double const dd = static_cast<double>(d);
    return 2 * std::exp(-dd * dd / (32 * static_cast<double>(a)));
}

double clt_min_age(std::int64_t d)
{
    double const ad = std::fabs(static_cast<double>(d));
    return ad * ad / (64 * std::log(ad));
}

CltBounds local_clt_bounds(std::uint64_t a, std::int64_t d, double zeta)
{
    if (std::llabs(d) < 2)
        throw std::domain_error("local_clt_bounds: |d| must be at least 2");
    if (!(zeta > 0))
        throw std::domain_error("local_clt_bounds: zeta must be positive");
    double const ad = static_cast<double>(a);
    if (ad < clt_min_age(d))
        throw std::domain_error("local_clt_bounds: age below d^2 / (64 ln |d|)");
    double const dd = static_cast<double>(d);
    double const log_scale = 0.5 * std::log(2 / (std::numbers::pi * ad));
    double const q = dd * dd / ad;
    return {(1 - zeta) * std::exp(log_scale - 0.75 * q),
            (1 + zeta) * std::exp(log_scale - 0.25 * q)};
}

CltThreshold find_clt_threshold(double zeta, std::int64_t d_max)
{
    CltThreshold r;
    for (std::int64_t d = 2; d <= d_max; d += 2)
    {
        auto const d2 = static_cast<std::uint64_t>(d * d);
        auto a_min = static_cast<std::uint64_t>(std::ceil(clt_min_age(d)));
        if (a_min % 2 != 0)
            ++a_min;
        for (std::uint64_t a : {a_min, d2 / 2, d2, 4 * d2})
        {
            CltBounds const b = local_clt_bounds(a, d, zeta);
            double const p = exact_pmf_1d(a, d);
            ++r.points_checked;
            if (p < b.lower || p > b.upper)
            {
                ++r.failures;
                r.largest_failure = d;
            }
        }
    }
    r.d0 = r.largest_failure + 2;
    return r;
}

double central_binomial_ratio(std::uint64_t m)
{
    double const md = static_cast<double>(m);
    if (m == 0)
        return 0.0;
    // Everything but the Stirling remainders cancels.
    return std::exp(stirlerr(2 * md) - 2 * stirlerr(md));
}

}  // namespace mnf
