#include "mnf/linkdist.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mnf/stats.hpp"
#include "mnf/walk.hpp"

namespace mnf {

bool parity_admissible(Displacement const& d)
{
    if (d.dims() == 0)
        return true;
    auto const p = d[0] & 1;
    return std::all_of(d.x.begin(), d.x.end(), [p](std::int64_t v) { return (v & 1) == p; });
}

LinkValue f_exact(Displacement const& d, ForgettingSchedule const& schedule)
{
    int const k = d.dims();
    if (k < 1)
        throw std::invalid_argument("f_exact: empty displacement");
    if (!parity_admissible(d))
        return {};
    auto const m = static_cast<std::uint64_t>(linf_norm(d));
    std::uint64_t const a_max = schedule.a_max();
    if (m > a_max)
        throw std::out_of_range("f_exact: ||d||inf exceeds a_max");

    // Term-by-term head.
    std::uint64_t const head_end =
        std::min(a_max, std::max<std::uint64_t>(ForgettingSchedule::kDenseLimit, 64 * m));
    CompensatedSum sum;
    std::uint64_t a = m;
    for (; a <= head_end; a += 2)
        sum.add(schedule.pi(a) * std::exp(log_pmf_kd(a, d)));

    LinkValue out;
    double error = 0;

    // Smooth stretch (head_end, a_max] over ages of the parity of m.
    std::uint64_t const first = a;
    std::uint64_t const last = a_max - ((a_max - m) & 1u);
    if (first <= last && schedule.is_harmonic())
    {
        double const eps = schedule.epsilon();
        double const log_c = std::log(schedule.c_norm()) + std::log(2.0)
                             + (1 + eps) * std::log(std::numbers::ln2);
        auto log_g = [&](double x) {
            double s = log_c - std::log(x) - (1 + eps) * std::log(std::log(x));
            for (auto v : d.x)
                s += log_pmf_1d_smooth(x, static_cast<double>(v));
            return s;
        };
        auto g = [&](double x) { return std::exp(log_g(x)); };
        auto g_slope = [&](double x) {
            double const h = 1e-5 * x;
            return (g(x + h) - g(x - h)) / (2 * h);
        };

        double const x0 = static_cast<double>(first);
        double const x1 = static_cast<double>(last);
        double quad_err = 0;
        double integral = 0;
        if (x1 > x0)
        {
            integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                [&](double u) { return std::exp(log_g(std::exp(u)) + u); },
                std::log(x0), std::log(x1), 20, 1e-11, &quad_err);
        }
        double const ends = 0.5 * (g(x0) + g(x1));
        double const slope_corr = (g_slope(x1) - g_slope(x0)) / 6.0;
        sum.add(0.5 * integral);
        sum.add(ends);
        sum.add(slope_corr);
        error += 0.5 * quad_err + std::fabs(slope_corr);
    }
    else if (first <= last)
    {
        throw std::logic_error("f_exact: custom schedule beyond its dense table");
    }

    // Ages above a_max: Pr{X(a)=d} <= sqrt(2 / (pi (a-1))) per coordinate.
    double const peak = std::min(1.0, std::sqrt(2 / (std::numbers::pi * static_cast<double>(a_max))));
    error += schedule.tail_mass() * std::pow(peak, k);

    out.value = sum.value();
    out.error = error + 1e-14 * out.value;
    return out;
}

Displacement sample_link(ForgettingSchedule const& schedule, int k, Rng& rng)
{
    return sample_displacement(sample_age(schedule, rng), k, rng);
}

//---------------------------------------------------------------------------//
// HarmonicBaseline
//---------------------------------------------------------------------------//

HarmonicBaseline::HarmonicBaseline(LatticeConfig const& cfg) : cfg_(cfg)
{
    std::int64_t const half = cfg_.half();
    radius_cdf_.resize(static_cast<std::size_t>(half));
    CompensatedSum s;
    for (std::int64_t r = 1; r <= half; ++r)
    {
        s.add(shell_size(r) / std::pow(static_cast<double>(r), cfg_.k()));
        radius_cdf_[static_cast<std::size_t>(r - 1)] = s.value();
    }
    total_ = s.value();
    for (auto& c : radius_cdf_)
        c /= total_;
}

double HarmonicBaseline::shell_size(std::int64_t r) const
{
    int const k = cfg_.k();
    if (r < 1 || r > cfg_.half())
        return 0;
    if (r < cfg_.half())
        return std::pow(2.0 * r + 1, k) - std::pow(2.0 * r - 1, k);
    double const l = static_cast<double>(cfg_.side());
    return std::pow(l, k) - std::pow(l - 1, k);
}

double HarmonicBaseline::weight(Displacement const& d) const
{
    auto const r = linf_norm(wrap(d, cfg_));
    if (r == 0)
        throw std::invalid_argument("harmonic baseline: zero displacement has no weight");
    return 1.0 / std::pow(static_cast<double>(r), cfg_.k());
}

double HarmonicBaseline::probability(Displacement const& d) const
{
    return weight(d) / total_;
}

Displacement HarmonicBaseline::sample(Rng& rng) const
{
    int const k = cfg_.k();
    double const u = uniform01(rng);
    auto it = std::upper_bound(radius_cdf_.begin(), radius_cdf_.end(), u);
    std::int64_t r = std::min<std::int64_t>(it - radius_cdf_.begin() + 1, cfg_.half());

    // Values of one coordinate: inner = |x| < r, saturated = |x| = r,
    // full = |x| <= r, all restricted to (-L/2, L/2].
    bool const edge = r == cfg_.half();
    double const n_inner = 2.0 * r - 1;
    double const n_sat = edge ? 1 : 2;
    double const n_full = n_inner + n_sat;

    // Choose the first coordinate that sits on the shell.
    std::vector<double> w(static_cast<std::size_t>(k));
    double total = 0;
    for (int i = 0; i < k; ++i)
    {
        w[static_cast<std::size_t>(i)] = std::pow(n_inner, i) * n_sat * std::pow(n_full, k - 1 - i);
        total += w[static_cast<std::size_t>(i)];
    }
    double v = uniform01(rng) * total;
    int first = k - 1;
    for (int i = 0; i < k; ++i)
    {
        if (v < w[static_cast<std::size_t>(i)])
        {
            first = i;
            break;
        }
        v -= w[static_cast<std::size_t>(i)];
    }

    auto const inner = static_cast<std::uint64_t>(n_inner);
    auto const full = static_cast<std::uint64_t>(n_full);
    Displacement d = Displacement::zero(k);
    for (int i = 0; i < k; ++i)
    {
        if (i < first)
            d[i] = static_cast<std::int64_t>(uniform_below(rng, inner)) - (r - 1);
        else if (i == first)
            d[i] = edge || (rng() & 1u) ? r : -r;
        else
        {
            // edge shell: -r is not a torus representative
            std::int64_t const lo = edge ? -(r - 1) : -r;
            d[i] = static_cast<std::int64_t>(uniform_below(rng, full)) + lo;
        }
    }
    return d;
}

//---------------------------------------------------------------------------//

TailBracket tail_bracket(double n, int k, double epsilon)
{
    if (k < 1 || !(epsilon > 0))
        throw std::domain_error("tail_bracket: need k >= 1 and epsilon > 0");
    if (!(n >= std::exp(2 * (1 + epsilon))))
        throw std::domain_error("tail_bracket: N must be at least e^{2(1+eps)}");
    double const kd = k;
    double const p = 1 + epsilon;
    return {(2 / (kd + 1)) * std::exp(-0.5 * kd * std::log(n) - p * std::log(std::log(n))),
            (2 / kd) * std::exp(-0.5 * kd * std::log(n - 1) - p * std::log(std::log(n - 1)))};
}

double scaled_link_ratio(Displacement const& d, ForgettingSchedule const& schedule, std::int64_t d0)
{
    for (auto v : d.x)
        if (std::llabs(v) < d0)
            throw std::domain_error("scaled_link_ratio: every |d_i| must be at least d0");
    if (!parity_admissible(d))
        throw std::domain_error("scaled_link_ratio: mixed-parity displacement has f = 0");
    double const m = static_cast<double>(linf_norm(d));
    double const f = f_exact(d, schedule).value;
    return f * std::pow(m, d.dims())
           * std::exp((1 + schedule.epsilon()) * std::log(std::log(m)));
}

//---------------------------------------------------------------------------//
// LinkLengthTable
//---------------------------------------------------------------------------//

LinkLengthTable::LinkLengthTable(SchedulePtr schedule, int k)
    : schedule_(std::move(schedule)), k_(k)
{
    if (!schedule_)
        throw std::invalid_argument("LinkLengthTable: null schedule");
    if (k < 1)
        throw std::invalid_argument("LinkLengthTable: k must be positive");
}

LinkValue LinkLengthTable::probe(Displacement const& d)
{
    if (d.dims() != k_)
        throw std::invalid_argument("LinkLengthTable: dimension mismatch");
    {
        std::lock_guard lock(mutex_);
        if (auto it = values_.find(d); it != values_.end())
            return it->second;
    }
    LinkValue const v = f_exact(d, *schedule_);
    std::lock_guard lock(mutex_);
    return values_.emplace(d, v).first->second;
}

std::vector<std::pair<Displacement, LinkValue>> LinkLengthTable::entries() const
{
    std::lock_guard lock(mutex_);
    return {values_.begin(), values_.end()};
}

std::size_t LinkLengthTable::size() const
{
    std::lock_guard lock(mutex_);
    return values_.size();
}

double LinkLengthTable::truncation_error() const
{
    std::lock_guard lock(mutex_);
    double e = 0;
    for (auto const& [d, v] : values_)
        e = std::max(e, v.error);
    return e;
}

void LinkLengthTable::write_csv(std::ostream& os) const
{
    os << "k,epsilon";
    for (int i = 1; i <= k_; ++i)
        os << ",d_" << i;
    os << ",f,err\n";
    auto const old = os.precision(17);
    for (auto const& [d, v] : entries())
    {
        os << k_ << ',' << schedule_->epsilon();
        for (auto x : d.x)
            os << ',' << x;
        os << ',' << v.value << ',' << v.error << '\n';
    }
    os.precision(old);
}

}  // namespace mnf
