#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "mnf/dynamics.hpp"
#include "mnf/forgetting.hpp"
#include "mnf/lattice.hpp"
#include "mnf/linkdist.hpp"
#include "mnf/rng.hpp"

namespace mnf {

//! Source of each node's single long-range contact.
class LinkProvider
{
  public:
    virtual ~LinkProvider() = default;
    //! Contact of u; u itself means a self-loop.
    virtual Coord contact(Coord const& u) = 0;
};

//! Contacts frozen from a dynamics snapshot. Node i uses token i; nodes
//! without a token have a self-loop.
class SnapshotProvider final : public LinkProvider
{
  public:
    SnapshotProvider(LatticeConfig const& cfg, LinkSnapshot snapshot);
    Coord contact(Coord const& u) override;

  private:
    LatticeConfig cfg_;
    LinkSnapshot snap_;
};

/*!
 * Draws a node's link on first query and memoizes it, so every node has one
 * fixed link and links of distinct nodes are independent.
 */
class MemoProvider : public LinkProvider
{
  public:
    Coord contact(Coord const& u) final;
    std::size_t sampled_nodes() const { return memo_.size(); }

  protected:
    MemoProvider(LatticeConfig const& cfg, Rng rng) : cfg_(cfg), rng_(std::move(rng)) {}
    virtual Displacement draw(Rng& rng) = 0;

    LatticeConfig cfg_;

  private:
    Rng rng_;
    std::unordered_map<std::uint64_t, Coord> memo_;
};

//! Links from the stationary move-and-forget law.
class StationaryProvider final : public MemoProvider
{
  public:
    StationaryProvider(LatticeConfig const& cfg, SchedulePtr schedule, Rng rng);

  private:
    Displacement draw(Rng& rng) override;
    SchedulePtr schedule_;
};

//! Links from the 1/||d||inf^k law.
class HarmonicProvider final : public MemoProvider
{
  public:
    HarmonicProvider(LatticeConfig const& cfg, std::shared_ptr<const HarmonicBaseline> law, Rng rng);

  private:
    Displacement draw(Rng& rng) override;
    std::shared_ptr<const HarmonicBaseline> law_;
};

struct RoutingTrace
{
    std::vector<Coord> nodes;
    std::vector<std::int64_t> distances;  //!< l1 distance to target at each node
    std::vector<bool> used_long_range;    //!< per hop
    std::uint64_t hops = 0;
    bool reached = false;  //!< false if max_steps ran out first
};

/*!
 * Greedy forwarding: from u, move to whichever of u's long-range contact and
 * its 2k grid neighbors is closest to t in l1. The long-range contact is
 * considered first and kept on ties; grid neighbors follow in grid_neighbors
 * order and must be strictly closer to replace it. Self-loops are skipped.
 */
RoutingTrace greedy_route(Coord const& s, Coord const& t, LinkProvider& provider,
                          LatticeConfig const& cfg, std::uint64_t max_steps);

//! 64 ln^{2+eps} d + 4 * 6 k d0, rounded up.
std::uint64_t default_max_steps(std::int64_t d, int k, double epsilon, std::int64_t d0 = 64);

enum class ProviderKind
{
    move_and_forget,
    harmonic,
};
std::string to_string(ProviderKind kind);

struct RouteExperiment
{
    int k = 1;
    double epsilon = 1.0;
    std::int64_t side = 1 << 16;
    std::uint64_t a_max = 1'000'000'000'000ULL;
    std::vector<std::int64_t> distances{16, 64, 256, 1024, 4096};
    std::uint64_t trials = 2000;
    std::uint64_t seed = 1;
    std::int64_t d0 = 64;
};

struct RouteRow
{
    ProviderKind provider = ProviderKind::move_and_forget;
    std::int64_t d = 0;
    std::uint64_t trials = 0;
    double mean_hops = 0;
    double stderr_hops = 0;
    double failure_rate = 0;
    std::uint64_t max_steps = 0;
};

/*!
 * For each distance, route `trials` uniformly drawn source/target pairs at
 * exact l1 distance d, each over a fresh memoizing provider. Pairs are the
 * same for both provider kinds. Failed trials count max_steps hops.
 * Throws std::invalid_argument unless side >= 8 max(d).
 */
std::vector<RouteRow> routing_experiment(RouteExperiment const& cfg, ProviderKind kind,
                                         SchedulePtr schedule, unsigned workers);

//! One trial of routing_experiment, reproducible on its own: trial `trial`
//! at distance index `di`. `baseline` is needed for the harmonic kind.
RoutingTrace run_route_trial(RouteExperiment const& cfg, ProviderKind kind,
                             SchedulePtr const& schedule,
                             std::shared_ptr<const HarmonicBaseline> const& baseline,
                             std::size_t di, std::uint64_t trial);

//! Uniform source and a target uniform on the l1 sphere of radius d around it.
std::pair<Coord, Coord> sample_route_pair(LatticeConfig const& cfg, std::int64_t d, Rng& rng);

struct HalvingEstimate
{
    double probability = 0;
    double stderr_prob = 0;
    std::uint64_t trials = 0;
};

/*!
 * Probability that a node at l1 distance delta from the target has its
 * stationary link land within l1 distance delta/2 of the target. The offset
 * to the target is uniform on the l1 sphere; computed on Z^k.
 * Throws std::domain_error unless delta >= 6 k d0.
 */
HalvingEstimate halving_probability(std::int64_t delta, ForgettingSchedule const& schedule,
                                    int k, std::uint64_t trials, std::uint64_t seed,
                                    unsigned workers, std::int64_t d0 = 64);

struct PolylogFit
{
    double exponent = 0;
    double residual = 0;  //!< rms residual of ln(hops) about the fit
};

//! Slope of ln(hops) against ln(ln d). Needs >= 4 points with
//! max d / min d >= 100 and every d > e; throws std::invalid_argument.
PolylogFit fit_polylog(std::vector<std::pair<double, double>> const& d_and_hops);

}  // namespace mnf
