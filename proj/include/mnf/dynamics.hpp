#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "mnf/forgetting.hpp"
#include "mnf/lattice.hpp"
#include "mnf/rng.hpp"

namespace mnf {

struct DynamicsOptions
{
    //! Tokens per shard. Each shard owns one random stream, so results
    //! depend on this value but never on the number of workers.
    std::uint64_t shard_size = 4096;
    //! Each coordinate moves with probability 1/2 (else stays). Experimental;
    //! breaks the parity structure of the link law.
    bool lazy_walk = false;
};

//! Read-only view of one token.
struct Token
{
    Coord origin;
    Displacement displacement;  //!< unwrapped walk offset
    std::uint64_t age = 0;
};

//! Long-range contact of every tracked node, wrapped onto the torus.
struct LinkSnapshot
{
    int k = 0;
    std::vector<std::int64_t> offsets;  //!< token-major, k per token

    std::size_t size() const { return k == 0 ? 0 : offsets.size() / static_cast<std::size_t>(k); }
    Displacement offset(std::size_t i) const;
    Coord contact(std::size_t i, LatticeConfig const& cfg) const;
};

/*!
 * Population of independent move-and-forget tokens.
 *
 * Token i is launched from node coord_of(i). Each tick, every token's age is
 * incremented and the token is forgotten with probability phi(new age),
 * restarting at age 0 with zero displacement; a surviving token takes one
 * walk step. Tokens are grouped in fixed shards with their own streams and
 * advanced shard by shard, so advance(T) is bit-identical to T calls of
 * tick() and to any worker count.
 */
class World
{
  public:
    static World fresh(LatticeConfig const& cfg, SchedulePtr schedule,
                       std::uint64_t n_tokens, std::uint64_t seed,
                       DynamicsOptions opts = {});

    //! Ages drawn from the stationary law, displacements from the walk at
    //! that age.
    static World stationary(LatticeConfig const& cfg, SchedulePtr schedule,
                            std::uint64_t n_tokens, std::uint64_t seed,
                            DynamicsOptions opts = {});

    //! One step for every token. Throws ScheduleExhausted if an age would
    //! pass a_max; the state is then unusable.
    void tick() { advance(1); }
    void advance(std::uint64_t ticks, unsigned workers = 1);

    LatticeConfig const& lattice() const { return cfg_; }
    ForgettingSchedule const& schedule() const { return *schedule_; }
    SchedulePtr schedule_ptr() const { return schedule_; }
    DynamicsOptions const& options() const { return opts_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t tick_count() const { return ticks_; }
    std::uint64_t size() const { return static_cast<std::uint64_t>(ages_.size()); }

    std::span<const std::uint64_t> ages() const { return ages_; }
    //! Token-major unwrapped offsets, k per token.
    std::span<const std::int64_t> displacements() const { return disp_; }
    Token token(std::uint64_t i) const;

    LinkSnapshot snapshot_links() const;

    //! Parity and range invariants of every token; returns the first
    //! offending index or size() if all hold. Skipped checks for lazy walks.
    std::uint64_t find_invalid_token() const;

    //! Text dump: options, seed, tick count, shard stream states, tokens.
    void write_checkpoint(std::ostream& os) const;
    static World read_checkpoint(std::istream& is, LatticeConfig const& cfg,
                                 SchedulePtr schedule);

    bool operator==(World const& other) const;

  private:
    struct Shard
    {
        Rng rng;
        std::uint64_t bits = 0;
        int bits_left = 0;
    };

    World(LatticeConfig const& cfg, SchedulePtr schedule, std::uint64_t n_tokens,
          std::uint64_t seed, DynamicsOptions opts);

    void advance_shard(std::size_t s, std::uint64_t ticks);

    LatticeConfig cfg_;
    SchedulePtr schedule_;
    DynamicsOptions opts_;
    std::uint64_t seed_ = 0;
    std::uint64_t ticks_ = 0;
    std::vector<std::uint64_t> ages_;
    std::vector<std::int64_t> disp_;
    std::vector<Shard> shards_;
    std::vector<std::uint64_t> forget_threshold_;  //!< phi(a) * 2^64
};

//---------------------------------------------------------------------------//
// Diagnostics
//---------------------------------------------------------------------------//

/*!
 * Age bins: one per age below 16, then one per octave [2^j, 2^{j+1}).
 * Heavy-tailed ages make per-age histograms dominated by sampling noise in
 * the tail; octave bins keep every bin well populated.
 */
constexpr std::size_t kAgeBins = 76;
std::size_t age_bin(std::uint64_t a);
//! Inclusive age range of a bin.
std::pair<std::uint64_t, std::uint64_t> age_bin_range(std::size_t bin);

std::vector<std::uint64_t> age_histogram(std::span<const std::uint64_t> ages);

//! Stationary bin probabilities, renormalized over [0, a_max].
std::vector<double> age_reference(ForgettingSchedule const& schedule);

//! TV distance between the binned population ages and the stationary law.
double age_tv_distance(World const& world);

/*!
 * Counts of unwrapped link offsets: keyed by the full displacement, or with
 * radial = true by the one-element vector {||d||inf}.
 */
using LengthHistogram = std::map<std::vector<std::int64_t>, std::uint64_t>;
LengthHistogram length_histogram(World const& world, bool radial);

//! CSV with columns bin, count (bin is the key joined by ';').
void write_histogram_csv(std::ostream& os, LengthHistogram const& hist);

}  // namespace mnf
