#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "mnf/routing.hpp"

using namespace mnf;

namespace {

SchedulePtr default_schedule()
{
    static SchedulePtr s = make_schedule(1.0, 1'000'000'000'000ULL);
    return s;
}

class FixedProvider final : public LinkProvider
{
  public:
    explicit FixedProvider(Coord c) : c_(std::move(c)) {}
    Coord contact(Coord const&) override { return c_; }

  private:
    Coord c_;
};

void expect_valid(RoutingTrace const& tr, std::uint64_t max_steps)
{
    ASSERT_EQ(tr.hops + 1, tr.nodes.size());
    ASSERT_EQ(tr.distances.size(), tr.nodes.size());
    ASSERT_EQ(tr.used_long_range.size(), tr.hops);
    ASSERT_LE(tr.hops, max_steps);
    for (std::size_t i = 1; i < tr.distances.size(); ++i)
        ASSERT_LT(tr.distances[i], tr.distances[i - 1]);
}

}  // namespace

TEST(GreedyRoute, Trivial)
{
    LatticeConfig const cfg(2, 16);
    FixedProvider self_loops{Coord{0, 0}};
    RoutingTrace const same = greedy_route(Coord{3, 4}, Coord{3, 4}, self_loops, cfg, 10);
    EXPECT_EQ(same.hops, 0u);
    EXPECT_TRUE(same.reached);
    RoutingTrace const one = greedy_route(Coord{3, 4}, Coord{3, 5}, self_loops, cfg, 10);
    EXPECT_EQ(one.hops, 1u);
    EXPECT_FALSE(one.used_long_range[0]);
    EXPECT_THROW(greedy_route(Coord{3, 4}, Coord{3, 5}, self_loops, cfg, 0), std::invalid_argument);
}

TEST(GreedyRoute, SelfLoopsGiveGridDistance)
{
    LatticeConfig const cfg(2, 32);
    World const w = World::fresh(cfg, default_schedule(), cfg.node_count(), 1);
    SnapshotProvider provider(cfg, w.snapshot_links());
    Rng rng(5);
    for (int i = 0; i < 500; ++i)
    {
        Coord const s = sample_node(cfg, rng), t = sample_node(cfg, rng);
        RoutingTrace const tr = greedy_route(s, t, provider, cfg, 1000);
        ASSERT_TRUE(tr.reached);
        ASSERT_EQ(static_cast<std::int64_t>(tr.hops), l1_distance(s, t, cfg));
        expect_valid(tr, 1000);
    }
}

TEST(GreedyRoute, LongRangeWinsTies)
{
    LatticeConfig const cfg(2, 32);
    // From (0,0) to (2,2): grid neighbours (1,0) and (0,1) are at distance 3,
    // and so is the contact (3,0).
    FixedProvider p{Coord{3, 0}};
    RoutingTrace const tr = greedy_route(Coord{0, 0}, Coord{2, 2}, p, cfg, 10);
    ASSERT_GE(tr.hops, 1u);
    EXPECT_TRUE(tr.used_long_range[0]);
    EXPECT_EQ(tr.nodes[1], (Coord{3, 0}));
    // A strictly closer grid neighbour beats a worse contact.
    FixedProvider far{Coord{10, 10}};
    RoutingTrace const tr2 = greedy_route(Coord{0, 0}, Coord{2, 2}, far, cfg, 10);
    EXPECT_FALSE(tr2.used_long_range[0]);
    EXPECT_EQ(tr2.nodes[1], (Coord{1, 0}));
}

TEST(GreedyRoute, FailureIsFlagged)
{
    LatticeConfig const cfg(1, 64);
    FixedProvider self{Coord{0}};
    RoutingTrace const tr = greedy_route(Coord{5}, Coord{15}, self, cfg, 2);
    EXPECT_FALSE(tr.reached);
    EXPECT_EQ(tr.hops, 2u);
    expect_valid(tr, 2);
}

TEST(GreedyRoute, StationaryTracesAreValidAndDeterministic)
{
    RouteExperiment ex;
    ex.side = 4096;
    ex.distances = {16, 200};
    for (std::size_t di = 0; di < ex.distances.size(); ++di)
        for (std::uint64_t trial = 0; trial < 50; ++trial)
        {
            RoutingTrace const a =
                run_route_trial(ex, ProviderKind::move_and_forget, default_schedule(), nullptr, di, trial);
            RoutingTrace const b =
                run_route_trial(ex, ProviderKind::move_and_forget, default_schedule(), nullptr, di, trial);
            expect_valid(a, default_max_steps(ex.distances[di], 1, 1.0));
            ASSERT_EQ(a.nodes, b.nodes);
            ASSERT_EQ(a.distances.front(), ex.distances[di]);
        }
}

TEST(Provider, Memoizes)
{
    LatticeConfig const cfg(2, 1024);
    StationaryProvider p(cfg, default_schedule(), Rng(3));
    HarmonicProvider h(cfg, std::make_shared<const HarmonicBaseline>(cfg), Rng(3));
    Rng rng(1);
    for (int i = 0; i < 200; ++i)
    {
        Coord const u = sample_node(cfg, rng);
        Coord const c = p.contact(u);
        ASSERT_EQ(p.contact(u), c);
        ASSERT_TRUE(cfg.contains(c));
        Coord const g = h.contact(u);
        ASSERT_EQ(h.contact(u), g);
        ASSERT_NE(g, u);
    }
    EXPECT_LE(p.sampled_nodes(), 200u);
}

TEST(Provider, SnapshotNodesWithoutTokensLoop)
{
    LatticeConfig const cfg(1, 64);
    World w = World::stationary(cfg, default_schedule(), 10, 2);
    SnapshotProvider p(cfg, w.snapshot_links());
    EXPECT_EQ(p.contact(Coord{40}), (Coord{40}));
    EXPECT_EQ(p.contact(Coord{3}), w.snapshot_links().contact(3, cfg));
}

TEST(MaxSteps, Formula)
{
    double const l = std::log(4096.0);
    EXPECT_EQ(default_max_steps(4096, 1, 1.0, 64),
              static_cast<std::uint64_t>(std::ceil(64 * l * l * l + 24 * 64)));
    EXPECT_EQ(default_max_steps(16, 2, 0.5, 10),
              static_cast<std::uint64_t>(std::ceil(64 * std::pow(std::log(16.0), 2.5) + 480)));
}

TEST(RoutePairs, ExactDistance)
{
    for (int k : {1, 2, 3})
    {
        LatticeConfig const cfg(k, 256);
        Rng rng(static_cast<std::uint64_t>(k));
        for (int i = 0; i < 1000; ++i)
        {
            auto const [s, t] = sample_route_pair(cfg, 31, rng);
            ASSERT_EQ(l1_distance(s, t, cfg), 31);
        }
    }
}

TEST(RoutingExperiment, SmallGrid)
{
    RouteExperiment ex;
    ex.side = 1024;
    ex.distances = {4, 16, 64};
    ex.trials = 60;
    for (auto kind : {ProviderKind::move_and_forget, ProviderKind::harmonic})
    {
        auto const a = routing_experiment(ex, kind, default_schedule(), 1);
        auto const b = routing_experiment(ex, kind, default_schedule(), 3);
        ASSERT_EQ(a.size(), 3u);
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            EXPECT_EQ(a[i].d, ex.distances[i]);
            EXPECT_EQ(a[i].provider, kind);
            EXPECT_LE(a[i].mean_hops, static_cast<double>(a[i].d));
            EXPECT_EQ(a[i].failure_rate, 0.0);
            EXPECT_EQ(a[i].mean_hops, b[i].mean_hops);
            EXPECT_EQ(a[i].stderr_hops, b[i].stderr_hops);
        }
    }
    ex.side = 500;
    EXPECT_THROW(routing_experiment(ex, ProviderKind::harmonic, nullptr, 1), std::invalid_argument);
}

TEST(Halving, PositiveAndDeterministic)
{
    auto const s = default_schedule();
    HalvingEstimate const a = halving_probability(512, *s, 1, 200'000, 4, 1);
    HalvingEstimate const b = halving_probability(512, *s, 1, 200'000, 4, 3);
    EXPECT_GT(a.probability, 0.0);
    EXPECT_EQ(a.probability, b.probability);
    EXPECT_EQ(a.trials, 200'000u);
    EXPECT_THROW(halving_probability(383, *s, 1, 10, 4, 1), std::domain_error);
    EXPECT_GT(halving_probability(800, *s, 2, 50'000, 4, 1).probability, 0.0);
}

TEST(Polylog, RecoversGenerator)
{
    std::vector<std::pair<double, double>> pts;
    for (double d : {16.0, 64.0, 256.0, 1024.0, 4096.0})
        pts.emplace_back(d, std::pow(std::log(d), 3));
    PolylogFit const f = fit_polylog(pts);
    EXPECT_NEAR(f.exponent, 3.0, 1e-6);
    EXPECT_NEAR(f.residual, 0.0, 1e-9);
}

TEST(Polylog, FlagsPolynomialGrowth)
{
    auto fit_sqrt = [](double lo, double hi) {
        std::vector<std::pair<double, double>> pts;
        for (double d = lo; d <= hi * 1.0001; d *= 4)
            pts.emplace_back(d, std::sqrt(d));
        return fit_polylog(pts);
    };
    PolylogFit const narrow = fit_sqrt(16, 4096);
    PolylogFit const wide = fit_sqrt(16, 16 * std::pow(4.0, 8));
    EXPECT_GT(wide.exponent, narrow.exponent);
    EXPECT_GT(narrow.residual, 1e-3);
}

TEST(Polylog, RejectsDegenerateTables)
{
    using V = std::vector<std::pair<double, double>>;
    EXPECT_THROW(fit_polylog(V{{16, 1}, {64, 2}, {4096, 3}}), std::invalid_argument);
    EXPECT_THROW(fit_polylog(V{{16, 1}, {32, 2}, {64, 3}, {128, 4}}), std::invalid_argument);
    EXPECT_THROW(fit_polylog(V{{2, 1}, {64, 2}, {256, 3}, {4096, 4}}), std::invalid_argument);
    EXPECT_THROW(fit_polylog(V{{16, 0}, {64, 2}, {256, 3}, {4096, 4}}), std::invalid_argument);
}
