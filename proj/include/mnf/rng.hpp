#pragma once

#include <cstdint>
#include <random>

namespace mnf {

using Rng = std::mt19937_64;

/// Independent stream families. Values are part of the on-disk
/// reproducibility contract; never renumber.
enum class Stream : std::uint64_t
{
    dynamics_shard = 1,
    routing_trial = 2,
    halving = 3,
    link_sampling = 4,
    age_chain = 5,
    verification = 6,
};

/*!
 * Counter-based seed derivation.
 *
 * A stream seed is obtained by folding (domain, index, sub) into the master
 * seed through successive SplitMix64 finalizer rounds:
 *
 *   h0 = mix(master + G)
 *   h1 = mix(h0 ^ (domain * G))
 *   h2 = mix(h1 ^ (index + G))
 *   h3 = mix(h2 ^ (sub + 2G))
 *
 * with G = 0x9E3779B97F4A7C15. Every worker derives the stream it needs from
 * the identifiers of the work item, so results never depend on how work is
 * scheduled across threads.
 */
std::uint64_t derive_seed(std::uint64_t master, Stream domain,
                          std::uint64_t index, std::uint64_t sub = 0);

inline Rng make_stream(std::uint64_t master, Stream domain,
                       std::uint64_t index, std::uint64_t sub = 0)
{
    return Rng{derive_seed(master, domain, index, sub)};
}

//! Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

//! Uniform integer in [0, n).
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n)
{
    std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
    return dist(rng);
}

}  // namespace mnf
