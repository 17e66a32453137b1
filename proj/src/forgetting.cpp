#include "mnf/forgetting.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "mnf/stats.hpp"

namespace mnf {
namespace {

constexpr double kLn2 = 0.69314718055994530942;

void require_epsilon(double epsilon)
{
    if (!(epsilon > 0) || !std::isfinite(epsilon))
        throw ScheduleError("forgetting exponent epsilon must be positive and finite");
}

//! K = 2 ln^{1+eps} 2, so that B(j) = K / (j ln^{1+eps} j).
double harmonic_scale(double epsilon)
{
    return std::exp(kLn2 + (1 + epsilon) * std::log(kLn2));
}

//! h(x) = K / (x ln^{1+eps} x)
double harmonic_density(double x, double epsilon, double scale)
{
    return scale * std::exp(-std::log(x) - (1 + epsilon) * std::log(std::log(x)));
}

//! h'(x)
double harmonic_density_slope(double x, double epsilon, double scale)
{
    double lx = std::log(x);
    return -harmonic_density(x, epsilon, scale) * (1 + (1 + epsilon) / lx) / x;
}

//! int_x^inf h = (K / eps) ln^{-eps} x
double harmonic_upper_integral(double x, double epsilon, double scale)
{
    return scale / epsilon * std::exp(-epsilon * std::log(std::log(x)));
}

//! int_lo^hi h, without cancellation when hi is close to lo.
double harmonic_integral(double lo, double hi, double epsilon, double scale)
{
    double const log_lo = std::log(lo);
    double const d_log = std::log1p((hi - lo) / lo);            // ln hi - ln lo
    double const r = std::log1p(-d_log / (log_lo + d_log));     // ln(ln lo / ln hi)
    return scale / epsilon * std::exp(-epsilon * std::log(log_lo))
           * -std::expm1(epsilon * r);
}

}  // namespace

//---------------------------------------------------------------------------//

double log_keep(std::uint64_t a, double epsilon)
{
    require_epsilon(epsilon);
    if (a <= 2)
        return 0.0;
    double const ad = static_cast<double>(a);
    double const l1 = std::log1p(-1.0 / ad);  // ln((a-1)/a)
    return l1 + (1 + epsilon) * std::log1p(l1 / std::log(ad));
}

double phi(std::uint64_t a, double epsilon)
{
    return -std::expm1(log_keep(a, epsilon));
}

double log_survival_product(std::uint64_t j, double epsilon)
{
    require_epsilon(epsilon);
    if (j <= 2)
        return 0.0;
    double const jd = static_cast<double>(j);
    return kLn2 + (1 + epsilon) * std::log(kLn2) - std::log(jd)
           - (1 + epsilon) * std::log(std::log(jd));
}

double survival_product(std::uint64_t j, double epsilon)
{
    return std::exp(log_survival_product(j, epsilon));
}

double min_a_max(double epsilon)
{
    require_epsilon(epsilon);
    return std::exp(2 * (1 + epsilon));
}

double harmonic_segment_sum(std::uint64_t lo, std::uint64_t hi, double epsilon)
{
    require_epsilon(epsilon);
    if (lo < 3)
        throw std::invalid_argument("harmonic_segment_sum: lo must be >= 3");
    if (hi < lo)
        return 0.0;

    // Euler-Maclaurin past this point drops terms below 1e-13 relative.
    constexpr std::uint64_t kDirect = 4096;
    CompensatedSum s;
    std::uint64_t a = lo;
    for (; a <= hi && (a < kDirect || hi - a < 64); ++a)
        s.add(survival_product(a, epsilon));
    if (a > hi)
        return s.value();

    double const scale = harmonic_scale(epsilon);
    double const x0 = static_cast<double>(a);
    double const x1 = static_cast<double>(hi);
    s.add(harmonic_integral(x0, x1, epsilon, scale));
    s.add(0.5 * (harmonic_density(x0, epsilon, scale) + harmonic_density(x1, epsilon, scale)));
    s.add((harmonic_density_slope(x1, epsilon, scale)
           - harmonic_density_slope(x0, epsilon, scale)) / 12.0);
    return s.value();
}

TailSum harmonic_tail_sum(std::uint64_t n, double epsilon)
{
    require_epsilon(epsilon);
    if (n < 2)
        throw std::invalid_argument("harmonic_tail_sum: n must be >= 2");
    double const scale = harmonic_scale(epsilon);
    double const m = static_cast<double>(n) + 1;
    TailSum t;
    // trapezoid overestimates and midpoint underestimates a convex integrand
    t.lower = harmonic_upper_integral(m, epsilon, scale)
              + 0.5 * harmonic_density(m, epsilon, scale);
    t.upper = harmonic_upper_integral(m - 0.5, epsilon, scale);
    return t;
}

//---------------------------------------------------------------------------//
// AgeSampler
//---------------------------------------------------------------------------//

AgeSampler::AgeSampler(std::span<const double> dense_weights)
    : AgeSampler(dense_weights, HarmonicTail{})
{
}

AgeSampler::AgeSampler(std::span<const double> dense_weights, HarmonicTail tail)
    : tail_(tail)
{
    cumulative_.assign(dense_weights.size() + 1, 0.0);
    CompensatedSum s;
    for (std::size_t i = 0; i < dense_weights.size(); ++i)
    {
        double w = dense_weights[i];
        if (!(w >= 0) || !std::isfinite(w))
            throw std::invalid_argument("AgeSampler: weights must be finite and >= 0");
        s.add(w);
        cumulative_[i + 1] = s.value();
    }
    if (tail_.weight > 0 && (tail_.first < 3 || tail_.last < tail_.first))
        throw std::invalid_argument("AgeSampler: malformed harmonic tail");
    if (!(total_weight() > 0))
        throw std::invalid_argument("AgeSampler: total weight must be positive");
}

std::uint64_t AgeSampler::operator()(Rng& rng) const
{
    double const u = uniform01(rng) * total_weight();
    if (u < dense_weight())
    {
        auto first = cumulative_.begin() + 1;
        auto it = std::upper_bound(first, cumulative_.end(), u);
        auto idx = static_cast<std::uint64_t>(it - first);
        return std::min<std::uint64_t>(idx, cumulative_.size() - 2);
    }
    return sample_tail(rng);
}

std::uint64_t AgeSampler::sample_tail(Rng& rng) const
{
    // Propose x on (first - 1, last] with density proportional to
    // 1 / (x ln^{1+eps} x), take a = ceil(x), accept w.p. h(a) / h(x).
    double const eps = tail_.epsilon;
    double const g_lo = std::exp(-eps * std::log(std::log(static_cast<double>(tail_.first) - 1)));
    double const g_hi = std::exp(-eps * std::log(std::log(static_cast<double>(tail_.last))));
    for (;;)
    {
        double const g = g_lo - uniform01(rng) * (g_lo - g_hi);
        double x = std::exp(std::exp(-std::log(g) / eps));
        x = std::clamp(x, static_cast<double>(tail_.first - 1),
                       static_cast<double>(tail_.last));
        auto a = static_cast<std::uint64_t>(std::ceil(x));
        a = std::clamp(a, tail_.first, tail_.last);
        double const ad = static_cast<double>(a);
        double const log_accept = std::log(x / ad)
                                  + (1 + eps) * std::log(std::log(x) / std::log(ad));
        if (log_accept >= 0 || uniform01(rng) < std::exp(log_accept))
            return a;
    }
}

//---------------------------------------------------------------------------//
// ForgettingSchedule
//---------------------------------------------------------------------------//

ForgettingSchedule ForgettingSchedule::build(double epsilon, std::uint64_t a_max)
{
    require_epsilon(epsilon);
    if (static_cast<double>(a_max) < min_a_max(epsilon))
    {
        std::ostringstream os;
        os << "a_max=" << a_max << " is below e^{2(1+eps)}=" << min_a_max(epsilon)
           << "; the tail bracket does not apply";
        throw ScheduleError(os.str());
    }

    ForgettingSchedule s;
    s.epsilon_ = epsilon;
    s.a_max_ = a_max;
    s.harmonic_ = true;

    auto const n_dense = std::min<std::uint64_t>(a_max + 1, kDenseLimit);
    std::vector<double> b(n_dense);
    s.phi_table_.resize(n_dense);
    for (std::uint64_t a = 0; a < n_dense; ++a)
    {
        b[a] = survival_product(a, epsilon);
        s.phi_table_[a] = mnf::phi(a, epsilon);
    }

    AgeSampler::HarmonicTail tail;
    if (a_max >= n_dense)
    {
        tail.first = n_dense;
        tail.last = a_max;
        tail.epsilon = epsilon;
        tail.scale = harmonic_scale(epsilon);
        tail.weight = harmonic_segment_sum(n_dense, a_max, epsilon);
    }
    s.tail_ = harmonic_tail_sum(a_max, epsilon);
    s.finish(std::move(b), tail);
    return s;
}

ForgettingSchedule ForgettingSchedule::build(ForgettingFunction const& phi_fn,
                                             double epsilon, std::uint64_t a_max)
{
    require_epsilon(epsilon);
    if (static_cast<double>(a_max) < min_a_max(epsilon))
        throw ScheduleError("a_max is below e^{2(1+eps)}");
    if (a_max >= kDenseLimit)
        throw ScheduleError("custom forgetting functions are tabulated densely; a_max too large");

    ForgettingSchedule s;
    s.epsilon_ = epsilon;
    s.a_max_ = a_max;
    s.harmonic_ = false;
    s.phi_table_.resize(a_max + 1);

    std::vector<double> b(a_max + 1);
    double log_b = 0;
    CompensatedSum total;
    for (std::uint64_t a = 0; a <= a_max; ++a)
    {
        double const p = phi_fn(a);
        if (!(p >= 0 && p < 1))
        {
            std::ostringstream os;
            os << "forgetting probability phi(" << a << ")=" << p << " is outside [0, 1)";
            throw ScheduleError(os.str());
        }
        s.phi_table_[a] = p;
        if (a > 0)
            log_b += std::log1p(-p);
        b[a] = std::exp(log_b);
        total.add(b[a]);
    }

    double const bound = 3 + 2 * kLn2 / epsilon;
    if (total.value() > bound)
    {
        std::ostringstream os;
        os << "survival series reaches " << total.value() << " > 3 + 2 ln 2 / eps = " << bound
           << " by a_max; the age chain is not positive recurrent at the required rate";
        throw ScheduleError(os.str());
    }

    // a B(a) ln^{1+eps} a must be nonincreasing for the harmonic tail bound.
    auto weighted = [&](std::uint64_t a) {
        double const ad = static_cast<double>(a);
        return ad * std::exp((1 + epsilon) * std::log(std::log(ad))) * b[a];
    };
    std::uint64_t const from = std::max<std::uint64_t>(3, a_max / 2);
    for (std::uint64_t a = from + 1; a <= a_max; ++a)
    {
        if (weighted(a) > weighted(a - 1) * (1 + 1e-12))
        {
            std::ostringstream os;
            os << "survival product decays slower than 1/(a ln^{1+eps} a) near a=" << a
               << "; the tail of the series cannot be certified";
            throw ScheduleError(os.str());
        }
    }

    double const ratio = weighted(a_max) / harmonic_scale(epsilon);
    s.tail_.lower = 0;
    s.tail_.upper = ratio * harmonic_tail_sum(a_max, epsilon).upper;
    s.finish(std::move(b), AgeSampler::HarmonicTail{});
    return s;
}

void ForgettingSchedule::finish(std::vector<double> dense_b, AgeSampler::HarmonicTail tail)
{
    sampler_ = AgeSampler(dense_b, tail);
    survival_sum_ = sampler_.total_weight();
    c_norm_ = 1.0 / (survival_sum_ + tail_.mid());
    tail_mass_ = c_norm_ * tail_.upper;
    pi_table_.resize(dense_b.size());
    for (std::size_t a = 0; a < dense_b.size(); ++a)
        pi_table_[a] = c_norm_ * dense_b[a];
}

double ForgettingSchedule::phi(std::uint64_t a) const
{
    if (a < phi_table_.size())
        return phi_table_[a];
    if (a > a_max_ || !harmonic_)
        throw std::out_of_range("phi: age beyond a_max");
    return mnf::phi(a, epsilon_);
}

double ForgettingSchedule::pi(std::uint64_t a) const
{
    if (a < pi_table_.size())
        return pi_table_[a];
    if (a > a_max_ || !harmonic_)
        throw std::out_of_range("pi: age beyond a_max");
    return c_norm_ * survival_product(a, epsilon_);
}

double ForgettingSchedule::mass(std::uint64_t lo, std::uint64_t hi) const
{
    hi = std::min(hi, a_max_);
    if (lo > hi)
        return 0.0;
    auto const cum = sampler_.cumulative();
    std::uint64_t const n_dense = pi_table_.size();
    double b = 0;
    if (lo < n_dense)
    {
        std::uint64_t const top = std::min(hi, n_dense - 1);
        b += cum[top + 1] - cum[lo];
    }
    if (hi >= n_dense)
        b += harmonic_segment_sum(std::max(lo, n_dense), hi, epsilon_);
    return c_norm_ * b;
}

//---------------------------------------------------------------------------//

std::uint64_t age_step(std::uint64_t a, ForgettingSchedule const& schedule, Rng& rng)
{
    if (a >= schedule.a_max())
    {
        std::ostringstream os;
        os << "age chain reached a_max=" << schedule.a_max()
           << "; rebuild the schedule with a larger a_max";
        throw ScheduleExhausted(os.str());
    }
    return uniform01(rng) < schedule.phi(a + 1) ? 0 : a + 1;
}

BalanceReport verify_balance(ForgettingSchedule const& schedule)
{
    BalanceReport r;
    r.bound = 1e-9 + schedule.tail_mass();

    auto check_state = [&](std::uint64_t a) {
        double const keep = schedule.is_harmonic()
                                ? std::exp(log_keep(a, schedule.epsilon()))
                                : 1 - schedule.phi(a);
        double const res = std::fabs(schedule.pi(a - 1) * keep - schedule.pi(a));
        if (res > r.max_state_residual || r.states_checked == 0)
        {
            r.max_state_residual = res;
            r.worst_state = a;
        }
        ++r.states_checked;
    };

    std::uint64_t const last = schedule.pi_table().size() - 1;
    for (std::uint64_t a = 1; a <= last; ++a)
        check_state(a);
    if (schedule.a_max() > last)
    {
        double x = static_cast<double>(last);
        for (;;)
        {
            x *= 1.01;
            auto a = static_cast<std::uint64_t>(x);
            if (a >= schedule.a_max())
                break;
            check_state(a);
        }
        check_state(schedule.a_max());
    }

    CompensatedSum inflow;
    for (std::uint64_t i = 0; i < last; ++i)
        inflow.add(schedule.pi(i) * schedule.phi(i + 1));
    r.reset_horizon = last;
    r.reset_residual = std::fabs(schedule.pi(0) - inflow.value() - schedule.pi(last));
    return r;
}

//---------------------------------------------------------------------------//

void write_schedule(std::ostream& os, ForgettingSchedule const& schedule, std::size_t rows)
{
    std::size_t const n = schedule.is_harmonic()
                              ? std::min(rows, schedule.pi_table().size())
                              : schedule.pi_table().size();
    auto const old_precision = os.precision(17);
    os << "# mnf forgetting schedule v1\n"
       << "kind " << (schedule.is_harmonic() ? "harmonic" : "custom") << '\n'
       << "epsilon " << schedule.epsilon() << '\n'
       << "a_max " << schedule.a_max() << '\n'
       << "c_norm " << schedule.c_norm() << '\n'
       << "tail_mass " << schedule.tail_mass() << '\n'
       << "rows " << n << '\n'
       << "a phi pi\n";
    for (std::size_t a = 0; a < n; ++a)
        os << a << ' ' << schedule.phi_table()[a] << ' ' << schedule.pi_table()[a] << '\n';
    os.precision(old_precision);
}

namespace {

bool close(double a, double b, double rel)
{
    return std::fabs(a - b) <= rel * std::max(std::fabs(a), std::fabs(b))
           || (a == 0 && b == 0);
}

}  // namespace

ForgettingSchedule read_schedule(std::istream& is)
{
    std::map<std::string, std::string> header;
    std::string line;
    while (std::getline(is, line))
    {
        if (line.empty() || line[0] == '#')
            continue;
        if (line == "a phi pi")
            break;
        std::istringstream ls(line);
        std::string key, value;
        ls >> key >> value;
        header[key] = value;
    }
    for (char const* key : {"kind", "epsilon", "a_max", "c_norm", "tail_mass", "rows"})
        if (!header.count(key))
            throw ScheduleError(std::string("schedule file is missing '") + key + "'");

    double const epsilon = std::stod(header["epsilon"]);
    auto const a_max = std::stoull(header["a_max"]);
    auto const rows = std::stoull(header["rows"]);
    std::vector<double> phis, pis;
    phis.reserve(rows);
    pis.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i)
    {
        std::uint64_t a;
        double p, q;
        if (!(is >> a >> p >> q) || a != i)
            throw ScheduleError("schedule file has a malformed table row");
        phis.push_back(p);
        pis.push_back(q);
    }

    ForgettingSchedule s = [&] {
        if (header["kind"] == "harmonic")
            return ForgettingSchedule::build(epsilon, a_max);
        if (header["kind"] != "custom" || rows != a_max + 1)
            throw ScheduleError("custom schedule export must carry the full table");
        return ForgettingSchedule::build([&](std::uint64_t a) { return phis[a]; }, epsilon, a_max);
    }();

    constexpr double rel = 1e-12;
    if (!close(s.c_norm(), std::stod(header["c_norm"]), rel))
        throw ScheduleError("audit: c_norm does not match the rebuilt schedule");
    if (!close(s.tail_mass(), std::stod(header["tail_mass"]), rel))
        throw ScheduleError("audit: tail_mass does not match the rebuilt schedule");
    for (std::size_t a = 0; a < rows; ++a)
    {
        if (!close(s.phi(a), phis[a], rel) || !close(s.pi(a), pis[a], rel))
        {
            std::ostringstream os;
            os << "audit: table row " << a << " does not match the rebuilt schedule";
            throw ScheduleError(os.str());
        }
    }
    return s;
}

}  // namespace mnf
