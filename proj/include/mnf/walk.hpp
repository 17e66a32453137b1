#pragma once

#include <cstdint>

#include "mnf/lattice.hpp"
#include "mnf/rng.hpp"

namespace mnf {

//! One step of the diagonal walk: every coordinate moves by +1 or -1.
Displacement walk_step(Displacement d, Rng& rng);

/*!
 * ln Pr{X(a) = d} for the one-dimensional +/-1 walk; -inf off the support.
 *
 * Uses the saddle-point expansion of the binomial (Stirling remainders plus
 * the deviance term) rather than differences of lgamma, which keeps full
 * relative precision for a well past 10^8.
 */
double log_pmf_1d(std::uint64_t a, std::int64_t d);

//! The same expression at real a with |d| < a: a smooth interpolation of
//! log_pmf_1d across ages of either parity, used for quadrature in a.
double log_pmf_1d_smooth(double a, double d);

//! Pr{X(a) = d} = 2^{-a} C(a, (a+d)/2), zero when |d| > a or a + d is odd.
double exact_pmf_1d(std::uint64_t a, std::int64_t d);

//! Same law by direct product of ratios; a < 1000 only. Cross-check path.
double exact_pmf_1d_direct(std::uint64_t a, std::int64_t d);

//! Product of the per-coordinate laws.
double exact_pmf_kd(std::uint64_t a, Displacement const& d);
double log_pmf_kd(std::uint64_t a, Displacement const& d);

//! X(a): each coordinate is 2 Binomial(a, 1/2) - a, independently.
Displacement sample_displacement(std::uint64_t a, int k, Rng& rng);

//! 2 exp(-d^2 / (32 a)); requires a > 0.
double chernoff_bound(std::uint64_t a, std::int64_t d);

struct CltBounds
{
    double lower = 0;
    double upper = 0;
};

//! Smallest age inside the local-CLT regime for distance d: d^2 / (64 ln |d|).
double clt_min_age(std::int64_t d);

/*!
 * Local-CLT sandwich
 *   lower = (1 - zeta) sqrt(2/(pi a)) exp(-3 d^2 / (4a)),
 *   upper = (1 + zeta) sqrt(2/(pi a)) exp(-d^2 / (4a)).
 * Throws std::domain_error unless |d| >= 2, zeta > 0 and a >= clt_min_age(d).
 */
CltBounds local_clt_bounds(std::uint64_t a, std::int64_t d, double zeta);

//! Result of scanning even distances for the sandwich threshold.
struct CltThreshold
{
    std::int64_t d0 = 0;             //!< sandwich holds for every even d in [d0, d_max]
    std::int64_t largest_failure = 0;  //!< 0 if nothing failed
    std::uint64_t points_checked = 0;
    std::uint64_t failures = 0;
};

/*!
 * Check the sandwich at every even d in [2, d_max] and ages
 * {d^2/(64 ln d) rounded up to the parity of d, d^2/2, d^2, 4 d^2}.
 * d0 is the smallest even distance above the largest failure.
 */
CltThreshold find_clt_threshold(double zeta, std::int64_t d_max = 4096);

//! C(2m, m) sqrt(pi m) / 4^m, which tends to 1.
double central_binomial_ratio(std::uint64_t m);

}  // namespace mnf
