#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "mnf/forgetting.hpp"
#include "mnf/lattice.hpp"
#include "mnf/rng.hpp"

namespace mnf {

//! Probability with an upper bound on what the truncated evaluation omits.
struct LinkValue
{
    double value = 0;
    double error = 0;
};

//! True when all coordinates share one parity (only those offsets are reachable).
bool parity_admissible(Displacement const& d);

/*!
 * Stationary link law f(d) = sum_a pi(a) Pr{X(a) = d}, truncated at a_max.
 *
 * Ages of the right parity are summed term by term up to
 * max(2^20, 64 ||d||inf) (capped at a_max). Beyond that the summand is smooth
 * in a and the remaining stretch up to a_max is integrated by adaptive
 * Gauss-Kronrod with Euler-Maclaurin end corrections. The returned error
 * bounds the quadrature error, the end-correction size, and every age above
 * a_max (using Pr{X(a)=d} <= sqrt(2/(pi (a-1))) per coordinate).
 *
 * Mixed-parity d gives exactly {0, 0}. Throws std::out_of_range if
 * ||d||inf > a_max.
 */
LinkValue f_exact(Displacement const& d, ForgettingSchedule const& schedule);

//! Age from the schedule, then the walk displacement at that age.
Displacement sample_link(ForgettingSchedule const& schedule, int k, Rng& rng);

/*!
 * Law proportional to 1 / ||d||inf^k over the nonzero displacements of the
 * torus, i.e. over (-L/2, L/2]^k minus the origin.
 */
class HarmonicBaseline
{
  public:
    explicit HarmonicBaseline(LatticeConfig const& cfg);

    //! Number of torus displacements with ||d||inf = r, 1 <= r <= L/2.
    double shell_size(std::int64_t r) const;
    double normalization() const { return 1.0 / total_; }
    //! Unnormalized 1 / ||d||inf^k. Throws std::invalid_argument for d = 0.
    double weight(Displacement const& d) const;
    double probability(Displacement const& d) const;
    //! Displacement in (-L/2, L/2]^k.
    Displacement sample(Rng& rng) const;

  private:
    LatticeConfig cfg_;
    double total_ = 0;
    std::vector<double> radius_cdf_;  //!< radius_cdf_[r-1] = P(||d||inf <= r)
};

//! Bracket of sum_{a >= N} a^{-1-k/2} ln^{-(1+eps)} a.
struct TailBracket
{
    double lower = 0;
    double upper = 0;
};

/*!
 * lower = (2/(k+1)) / (N^{k/2} ln^{1+eps} N),
 * upper = (2/k) / ((N-1)^{k/2} ln^{1+eps}(N-1)).
 * Throws std::domain_error unless N >= e^{2(1+eps)}, k >= 1, eps > 0.
 */
TailBracket tail_bracket(double n, int k, double epsilon);

/*!
 * f(d) ||d||inf^k ln^{1+eps} ||d||inf, which should stay between two
 * constants up to a ln^{k/2} factor. Throws std::domain_error when some
 * |d_i| < d0 or d is parity-inadmissible.
 */
double scaled_link_ratio(Displacement const& d, ForgettingSchedule const& schedule,
                      std::int64_t d0 = 64);

/*!
 * Lazily probed values of f. Thread-safe: concurrent probes of the same
 * displacement may both evaluate, and the first insert wins.
 */
class LinkLengthTable
{
  public:
    LinkLengthTable(SchedulePtr schedule, int k);

    int k() const { return k_; }
    ForgettingSchedule const& schedule() const { return *schedule_; }

    LinkValue probe(Displacement const& d);
    std::vector<std::pair<Displacement, LinkValue>> entries() const;
    std::size_t size() const;
    //! Largest per-entry error among probed values.
    double truncation_error() const;

    //! Columns: k, epsilon, d_1..d_k, f, err.
    void write_csv(std::ostream& os) const;

  private:
    SchedulePtr schedule_;
    int k_;
    mutable std::mutex mutex_;
    std::map<Displacement, LinkValue> values_;
};

}  // namespace mnf
