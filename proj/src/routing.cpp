#include "mnf/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mnf/parallel.hpp"
#include "mnf/stats.hpp"

namespace mnf {

SnapshotProvider::SnapshotProvider(LatticeConfig const& cfg, LinkSnapshot snapshot)
    : cfg_(cfg), snap_(std::move(snapshot))
{
    if (snap_.k != cfg_.k())
        throw std::invalid_argument("SnapshotProvider: dimension mismatch");
}

Coord SnapshotProvider::contact(Coord const& u)
{
    std::uint64_t const i = cfg_.index_of(u);
    if (i >= snap_.size())
        return u;
    return snap_.contact(i, cfg_);
}

Coord MemoProvider::contact(Coord const& u)
{
    std::uint64_t const i = cfg_.index_of(u);
    if (auto it = memo_.find(i); it != memo_.end())
        return it->second;
    Coord c = translate(u, draw(rng_), cfg_);
    return memo_.emplace(i, std::move(c)).first->second;
}

StationaryProvider::StationaryProvider(LatticeConfig const& cfg, SchedulePtr schedule, Rng rng)
    : MemoProvider(cfg, std::move(rng)), schedule_(std::move(schedule))
{
}

Displacement StationaryProvider::draw(Rng& rng)
{
    return sample_link(*schedule_, cfg_.k(), rng);
}

HarmonicProvider::HarmonicProvider(LatticeConfig const& cfg,
                                   std::shared_ptr<const HarmonicBaseline> law, Rng rng)
    : MemoProvider(cfg, std::move(rng)), law_(std::move(law))
{
}

Displacement HarmonicProvider::draw(Rng& rng)
{
    return law_->sample(rng);
}

//---------------------------------------------------------------------------//

RoutingTrace greedy_route(Coord const& s, Coord const& t, LinkProvider& provider,
                          LatticeConfig const& cfg, std::uint64_t max_steps)
{
    if (max_steps < 1)
        throw std::invalid_argument("greedy_route: max_steps must be positive");
    if (!cfg.contains(s) || !cfg.contains(t))
        throw std::invalid_argument("greedy_route: endpoint outside the torus");

    RoutingTrace trace;
    Coord u = s;
    std::int64_t dist = l1_distance(u, t, cfg);
    trace.nodes.push_back(u);
    trace.distances.push_back(dist);
    while (dist > 0)
    {
        if (trace.hops == max_steps)
            return trace;
        Coord best;
        std::int64_t best_dist = std::numeric_limits<std::int64_t>::max();
        bool long_range = false;
        Coord c = provider.contact(u);
        if (c != u)
        {
            best_dist = l1_distance(c, t, cfg);
            best = std::move(c);
            long_range = true;
        }
        for (Coord& n : grid_neighbors(u, cfg))
        {
            std::int64_t const dn = l1_distance(n, t, cfg);
            if (dn < best_dist)
            {
                best_dist = dn;
                best = std::move(n);
                long_range = false;
            }
        }
        u = std::move(best);
        dist = best_dist;
        ++trace.hops;
        trace.nodes.push_back(u);
        trace.distances.push_back(dist);
        trace.used_long_range.push_back(long_range);
    }
    trace.reached = true;
    return trace;
}

std::uint64_t default_max_steps(std::int64_t d, int k, double epsilon, std::int64_t d0)
{
    double const ln_d = std::log(static_cast<double>(std::max<std::int64_t>(d, 2)));
    double const steps = 64 * std::pow(ln_d, 2 + epsilon) + 4.0 * 6 * k * static_cast<double>(d0);
    return static_cast<std::uint64_t>(std::ceil(steps));
}

std::string to_string(ProviderKind kind)
{
    return kind == ProviderKind::move_and_forget ? "mnf" : "harmonic";
}

std::pair<Coord, Coord> sample_route_pair(LatticeConfig const& cfg, std::int64_t d, Rng& rng)
{
    Coord s = sample_node(cfg, rng);
    Coord t = translate(s, sample_l1_sphere(cfg.k(), d, rng), cfg);
    return {std::move(s), std::move(t)};
}

RoutingTrace run_route_trial(RouteExperiment const& cfg, ProviderKind kind,
                             SchedulePtr const& schedule,
                             std::shared_ptr<const HarmonicBaseline> const& baseline,
                             std::size_t di, std::uint64_t trial)
{
    LatticeConfig const lattice(cfg.k, cfg.side);
    std::int64_t const d = cfg.distances.at(di);
    // Pairs do not depend on the provider kind; links do.
    Rng pair_rng = make_stream(cfg.seed, Stream::routing_trial, trial, di);
    auto const [s, t] = sample_route_pair(lattice, d, pair_rng);
    std::uint64_t const link_sub = (static_cast<std::uint64_t>(kind) + 1) << 32 | di;
    Rng link_rng = make_stream(cfg.seed, Stream::routing_trial, trial, link_sub);
    std::unique_ptr<LinkProvider> provider;
    if (kind == ProviderKind::move_and_forget)
        provider = std::make_unique<StationaryProvider>(lattice, schedule, std::move(link_rng));
    else
        provider = std::make_unique<HarmonicProvider>(lattice, baseline, std::move(link_rng));
    return greedy_route(s, t, *provider, lattice,
                        default_max_steps(d, cfg.k, cfg.epsilon, cfg.d0));
}

std::vector<RouteRow> routing_experiment(RouteExperiment const& cfg, ProviderKind kind,
                                         SchedulePtr schedule, unsigned workers)
{
    if (cfg.distances.empty() || cfg.trials < 1)
        throw std::invalid_argument("routing_experiment: need distances and trials");
    std::int64_t const d_max = *std::max_element(cfg.distances.begin(), cfg.distances.end());
    if (*std::min_element(cfg.distances.begin(), cfg.distances.end()) < 1)
        throw std::invalid_argument("routing_experiment: distances must be positive");
    if (cfg.side < 8 * d_max)
        throw std::invalid_argument("routing_experiment: side must be at least 8 max(d)");
    if (kind == ProviderKind::move_and_forget && !schedule)
        throw std::invalid_argument("routing_experiment: missing schedule");

    LatticeConfig const lattice(cfg.k, cfg.side);
    std::shared_ptr<const HarmonicBaseline> baseline;
    if (kind == ProviderKind::harmonic)
        baseline = std::make_shared<const HarmonicBaseline>(lattice);

    std::vector<RouteRow> rows;
    for (std::size_t di = 0; di < cfg.distances.size(); ++di)
    {
        std::int64_t const d = cfg.distances[di];
        std::uint64_t const max_steps = default_max_steps(d, cfg.k, cfg.epsilon, cfg.d0);
        std::vector<std::uint64_t> hops(cfg.trials);
        std::vector<char> failed(cfg.trials);
        parallel_for(cfg.trials, workers, [&](std::size_t trial) {
            RoutingTrace const tr = run_route_trial(cfg, kind, schedule, baseline, di, trial);
            hops[trial] = tr.hops;
            failed[trial] = tr.reached ? 0 : 1;
        });

        RunningStats st;
        std::uint64_t n_failed = 0;
        for (std::size_t i = 0; i < cfg.trials; ++i)
        {
            st.add(static_cast<double>(hops[i]));
            n_failed += static_cast<std::uint64_t>(failed[i]);
        }
        rows.push_back(RouteRow{kind, d, cfg.trials, st.mean(), st.stderr_mean(),
                                static_cast<double>(n_failed) / static_cast<double>(cfg.trials),
                                max_steps});
    }
    return rows;
}

HalvingEstimate halving_probability(std::int64_t delta, ForgettingSchedule const& schedule,
                                    int k, std::uint64_t trials, std::uint64_t seed,
                                    unsigned workers, std::int64_t d0)
{
    if (delta < 6 * k * d0)
        throw std::domain_error("halving_probability: delta must be at least 6 k d0");
    if (trials < 1)
        throw std::invalid_argument("halving_probability: need at least one trial");

    constexpr std::uint64_t kBlock = 1 << 16;
    std::uint64_t const n_blocks = (trials + kBlock - 1) / kBlock;
    std::vector<std::uint64_t> hits(n_blocks, 0);
    parallel_for(n_blocks, workers, [&](std::size_t b) {
        Rng rng = make_stream(seed, Stream::halving, b, static_cast<std::uint64_t>(delta));
        std::uint64_t const n = std::min(kBlock, trials - b * kBlock);
        std::uint64_t h = 0;
        for (std::uint64_t i = 0; i < n; ++i)
        {
            Displacement const to_target = sample_l1_sphere(k, delta, rng);
            Displacement const link = sample_link(schedule, k, rng);
            std::int64_t rest = 0;
            for (int j = 0; j < k; ++j)
                rest += std::llabs(link[j] - to_target[j]);
            if (2 * rest <= delta)
                ++h;
        }
        hits[b] = h;
    });

    std::uint64_t total = 0;
    for (auto h : hits)
        total += h;
    double const p = static_cast<double>(total) / static_cast<double>(trials);
    return {p, std::sqrt(p * (1 - p) / static_cast<double>(trials)), trials};
}

PolylogFit fit_polylog(std::vector<std::pair<double, double>> const& d_and_hops)
{
    if (d_and_hops.size() < 4)
        throw std::invalid_argument("fit_polylog: need at least 4 distances");
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    std::vector<double> x, y;
    for (auto const& [d, h] : d_and_hops)
    {
        if (!(d > std::exp(1.0)) || !(h > 0))
            throw std::invalid_argument("fit_polylog: need d > e and positive hop counts");
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        x.push_back(std::log(std::log(d)));
        y.push_back(std::log(h));
    }
    if (hi / lo < 100)
        throw std::invalid_argument("fit_polylog: distances must span at least two decades");
    LinearFit const f = least_squares(x, y);
    return {f.slope, f.residual_rms};
}

}  // namespace mnf
