#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "mnf/rng.hpp"

namespace mnf {

//! Rejected forgetting schedule or schedule parameters.
class ScheduleError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

//! A token's age would leave the tabulated range [0, a_max].
class ScheduleExhausted : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//---------------------------------------------------------------------------//
// Harmonic forgetting function
//---------------------------------------------------------------------------//

/*!
 * Probability that a link of age a is forgotten.
 *
 * Zero for a <= 2, and 1 - ((a-1)/a) (ln(a-1)/ln a)^(1+eps) otherwise.
 * Evaluated from log1p/expm1 so that phi(a) ~ 1/a keeps full relative
 * precision for large a.
 */
double phi(std::uint64_t a, double epsilon);

//! ln(1 - phi(a)); zero for a <= 2.
double log_keep(std::uint64_t a, double epsilon);

/*!
 * Survival product B(j) = prod_{i=1..j} (1 - phi(i)).
 *
 * The product telescopes to 2 ln^(1+eps)2 / (j ln^(1+eps) j) for j >= 3 and
 * is 1 for j <= 2; this returns the closed form.
 */
double survival_product(std::uint64_t j, double epsilon);

//! ln of survival_product.
double log_survival_product(std::uint64_t j, double epsilon);

//! Smallest a_max accepted by build: the tail bracket needs a_max >= e^{2(1+eps)}.
double min_a_max(double epsilon);

//! Sum_{j=lo..hi} B(j) for 3 <= lo <= hi, from Euler-Maclaurin on the closed form.
double harmonic_segment_sum(std::uint64_t lo, std::uint64_t hi, double epsilon);

//! Certified bracket of sum_{j > n} B(j) from convexity of the summand.
struct TailSum
{
    double lower = 0;
    double upper = 0;
    double mid() const { return 0.5 * (lower + upper); }
};
TailSum harmonic_tail_sum(std::uint64_t n, double epsilon);

//---------------------------------------------------------------------------//
// Sampling
//---------------------------------------------------------------------------//

/*!
 * Inverse-CDF sampler over a dense prefix of nonnegative weights, with an
 * optional harmonic continuation on [tail_first, tail_last] whose weights are
 * K / (a ln^(1+eps) a). The continuation is sampled exactly by rejection from
 * the continuous density with the same shape.
 */
class AgeSampler
{
  public:
    struct HarmonicTail
    {
        std::uint64_t first = 0;
        std::uint64_t last = 0;
        double epsilon = 1.0;
        double scale = 0;   //!< K in K / (a ln^(1+eps) a)
        double weight = 0;  //!< sum of the tail weights
    };

    AgeSampler() = default;
    explicit AgeSampler(std::span<const double> dense_weights);
    AgeSampler(std::span<const double> dense_weights, HarmonicTail tail);

    std::uint64_t operator()(Rng& rng) const;

    //! cumulative()[a] = sum of dense weights below a; size dense + 1.
    std::span<const double> cumulative() const { return cumulative_; }
    double dense_weight() const { return cumulative_.back(); }
    double total_weight() const { return cumulative_.back() + tail_.weight; }
    HarmonicTail const& tail() const { return tail_; }

  private:
    std::uint64_t sample_tail(Rng& rng) const;

    std::vector<double> cumulative_{0.0};
    HarmonicTail tail_;
};

//---------------------------------------------------------------------------//
// Schedule
//---------------------------------------------------------------------------//

using ForgettingFunction = std::function<double(std::uint64_t)>;

/*!
 * Stationary law of the age chain for a forgetting function, truncated at
 * a_max with a certified tail.
 *
 * For the harmonic family the tables are held densely up to kDenseLimit and
 * continued by the closed form beyond; pi(a) and phi(a) are valid for every
 * a <= a_max. c_norm is 1 / (sum_{j<=a_max} B(j) + tail estimate) and
 * tail_mass is c_norm times the upper end of the tail bracket, so
 * sum_{a<=a_max} pi(a) + tail_mass lies in [1, 1 + width / sum B].
 *
 * Immutable after construction.
 */
class ForgettingSchedule
{
  public:
    static constexpr std::uint64_t kDenseLimit = std::uint64_t{1} << 20;

    //! Harmonic schedule. Throws ScheduleError if epsilon <= 0 or
    //! a_max < e^{2(1+eps)}.
    static ForgettingSchedule build(double epsilon, std::uint64_t a_max);

    /*!
     * Schedule for an arbitrary forgetting function, tabulated densely
     * (a_max < kDenseLimit).
     *
     * The function is accepted only if its survival series provably converges
     * at the harmonic rate: phi in [0, 1), partial sums of B within
     * 3 + 2 ln 2 / eps, and a B(a) ln^(1+eps) a nonincreasing over the top
     * half of the table. phi(a) = 1/a fails (its chain is null recurrent).
     */
    static ForgettingSchedule build(ForgettingFunction const& phi_fn,
                                    double epsilon, std::uint64_t a_max);

    double epsilon() const { return epsilon_; }
    std::uint64_t a_max() const { return a_max_; }
    double c_norm() const { return c_norm_; }
    double tail_mass() const { return tail_mass_; }
    bool is_harmonic() const { return harmonic_; }

    //! Sum_{j=0..a_max} B(j), and the full series estimate including the tail.
    double survival_sum() const { return survival_sum_; }
    double survival_series() const { return survival_sum_ + tail_.mid(); }
    TailSum tail_bracket() const { return tail_; }

    double phi(std::uint64_t a) const;
    double pi(std::uint64_t a) const;

    //! Dense prefixes of the tables (ages 0 .. size()-1).
    std::span<const double> phi_table() const { return phi_table_; }
    std::span<const double> pi_table() const { return pi_table_; }

    //! Sum_{a=lo..hi} pi(a), clipped to [0, a_max].
    double mass(std::uint64_t lo, std::uint64_t hi) const;
    //! Sum_{a<=a_max} pi(a); equals 1 - tail_mass up to the bracket width.
    double truncated_mass() const { return c_norm_ * survival_sum_; }

    AgeSampler const& sampler() const { return sampler_; }

  private:
    ForgettingSchedule() = default;
    void finish(std::vector<double> dense_b, AgeSampler::HarmonicTail tail);

    double epsilon_ = 1.0;
    std::uint64_t a_max_ = 0;
    bool harmonic_ = true;
    double c_norm_ = 0;
    double tail_mass_ = 0;
    double survival_sum_ = 0;
    TailSum tail_;
    std::vector<double> phi_table_;
    std::vector<double> pi_table_;
    AgeSampler sampler_;
};

using SchedulePtr = std::shared_ptr<ForgettingSchedule const>;

inline SchedulePtr make_schedule(double epsilon, std::uint64_t a_max)
{
    return std::make_shared<ForgettingSchedule const>(
        ForgettingSchedule::build(epsilon, a_max));
}

//---------------------------------------------------------------------------//
// Chain operations
//---------------------------------------------------------------------------//

//! One transition of the age chain: a+1 w.p. 1 - phi(a+1), else 0.
//! Throws ScheduleExhausted when a >= a_max.
std::uint64_t age_step(std::uint64_t a, ForgettingSchedule const& schedule, Rng& rng);

//! Stationary age, drawn from pi renormalized over [0, a_max].
inline std::uint64_t sample_age(ForgettingSchedule const& schedule, Rng& rng)
{
    return schedule.sampler()(rng);
}

struct BalanceReport
{
    double max_state_residual = 0;   //!< max_a |pi(a-1)(1 - phi(a)) - pi(a)|
    std::uint64_t worst_state = 0;
    double reset_residual = 0;       //!< |pi(0) - sum_i pi(i) phi(i+1) - pi(N)|
    std::uint64_t reset_horizon = 0; //!< N
    std::uint64_t states_checked = 0;
    double bound = 0;                //!< 1e-9 + tail_mass

    bool passed() const
    {
        return max_state_residual <= bound && reset_residual <= bound;
    }
};

/*!
 * Global balance residuals of pi under the age kernel.
 *
 * Per-state residuals are checked exhaustively over the dense table and on a
 * logarithmic grid of ages beyond it. The reset equation is checked over the
 * dense horizon N; truncating the chain at N sends the mass pi(N) of the
 * boundary state back to 0, which is the boundary correction.
 */
BalanceReport verify_balance(ForgettingSchedule const& schedule);

//---------------------------------------------------------------------------//
// Export / import
//---------------------------------------------------------------------------//

/*!
 * Structured text export: header lines "key value" (kind, epsilon, a_max,
 * c_norm, tail_mass, rows) followed by "a phi pi" rows. Custom schedules are
 * always written in full so they can be rebuilt.
 */
void write_schedule(std::ostream& os, ForgettingSchedule const& schedule,
                    std::size_t rows = 4096);

//! Rebuild a schedule from an export and audit it against the file: c_norm
//! and every row must agree to 1e-12 relative. Throws ScheduleError.
ForgettingSchedule read_schedule(std::istream& is);

}  // namespace mnf
