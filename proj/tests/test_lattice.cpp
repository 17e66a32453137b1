#include <gtest/gtest.h>

#include <cstdlib>
#include <map>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

#include "mnf/lattice.hpp"

using namespace mnf;

TEST(Lattice, RejectsBadSides)
{
    EXPECT_THROW(LatticeConfig(1, 7), std::invalid_argument);
    EXPECT_THROW(LatticeConfig(1, 2), std::invalid_argument);
    EXPECT_THROW(LatticeConfig(0, 8), std::invalid_argument);
    EXPECT_NO_THROW(LatticeConfig(3, 4));
}

TEST(Lattice, WrapDisplacementExamples)
{
    LatticeConfig l1(1, 8), l2(2, 8);
    EXPECT_EQ(wrap_displacement(Coord{0}, Coord{0}, l1), Displacement{0});
    EXPECT_EQ(wrap_displacement(Coord{0}, Coord{7}, l1), Displacement{-1});
    EXPECT_EQ(wrap_displacement(Coord{1, 1}, Coord{5, 2}, l2), (Displacement{4, 1}));
    EXPECT_THROW(wrap_displacement(Coord{0}, Coord{1, 1}, l2), std::invalid_argument);
}

TEST(Lattice, DistanceExamples)
{
    LatticeConfig l1(1, 8), l2(2, 8);
    EXPECT_EQ(l1_distance(Coord{3, 4}, Coord{3, 4}, l2), 0);
    EXPECT_EQ(l1_distance(Coord{0, 0}, Coord{1, 1}, l2), 2);
    EXPECT_EQ(l1_distance(Coord{0}, Coord{5}, l1), 3);
    EXPECT_EQ(linf_norm(Displacement{0, 0}), 0);
    EXPECT_EQ(linf_norm(Displacement{3, -5}), 5);
    EXPECT_EQ(linf_norm(Displacement{-2}), 2);
}

TEST(Lattice, GridNeighborsOrder)
{
    LatticeConfig l1(1, 8), l2(2, 4);
    EXPECT_EQ(grid_neighbors(Coord{0}, l1), (std::vector<Coord>{Coord{1}, Coord{7}}));
    EXPECT_EQ(grid_neighbors(Coord{0, 0}, l2),
              (std::vector<Coord>{Coord{1, 0}, Coord{3, 0}, Coord{0, 1}, Coord{0, 3}}));
    LatticeConfig l3(3, 10);
    Coord u{9, 0, 4};
    for (auto const& v : grid_neighbors(u, l3))
        EXPECT_EQ(l1_distance(u, v, l3), 1);
}

TEST(Lattice, MetricProperties)
{
    Rng rng(11);
    for (int k : {1, 2, 3})
    {
        LatticeConfig cfg(k, 12);
        for (int trial = 0; trial < 2000; ++trial)
        {
            Coord u = sample_node(cfg, rng), v = sample_node(cfg, rng), w = sample_node(cfg, rng);
            auto const duv = l1_distance(u, v, cfg);
            ASSERT_EQ(duv, l1_distance(v, u, cfg));
            ASSERT_GE(duv, 0);
            ASSERT_EQ(duv == 0, u == v);
            ASSERT_LE(l1_distance(u, w, cfg), duv + l1_distance(v, w, cfg));
            Displacement const d = wrap_displacement(u, v, cfg);
            ASSERT_LE(linf_norm(d), duv);
            ASSERT_LE(duv, k * linf_norm(d));
            ASSERT_EQ(translate(u, d, cfg), v);
            for (int i = 0; i < k; ++i)
            {
                ASSERT_GT(d[i], -cfg.half());
                ASSERT_LE(d[i], cfg.half());
            }
        }
    }
}

TEST(Lattice, IndexRoundTrip)
{
    LatticeConfig cfg(3, 6);
    EXPECT_EQ(cfg.node_count(), 216u);
    for (std::uint64_t i = 0; i < cfg.node_count(); ++i)
    {
        Coord c = cfg.coord_of(i);
        ASSERT_TRUE(cfg.contains(c));
        ASSERT_EQ(cfg.index_of(c), i);
    }
}

TEST(Lattice, SphereSizeMatchesEnumeration)
{
    for (int k : {1, 2, 3})
        for (std::int64_t r = 0; r <= 6; ++r)
        {
            std::uint64_t count = 0;
            std::int64_t const n = 2 * r + 1;
            std::int64_t total = 1;
            for (int i = 0; i < k; ++i)
                total *= n;
            for (std::int64_t idx = 0; idx < total; ++idx)
            {
                std::int64_t rest = idx, norm = 0;
                for (int i = 0; i < k; ++i)
                {
                    norm += std::llabs(rest % n - r);
                    rest /= n;
                }
                count += norm == r;
            }
            EXPECT_EQ(l1_sphere_size(k, r), static_cast<double>(count)) << k << ' ' << r;
        }
}

TEST(Lattice, SphereSamplerIsUniform)
{
    // k=2, r=3: 12 points, chi-square against the flat law.
    Rng rng(3);
    std::map<Displacement, int> counts;
    int const n = 120000;
    for (int i = 0; i < n; ++i)
    {
        Displacement d = sample_l1_sphere(2, 3, rng);
        ASSERT_EQ(l1_norm(d), 3);
        ++counts[d];
    }
    ASSERT_EQ(counts.size(), 12u);
    double chi2 = 0, expected = n / 12.0;
    for (auto const& [d, c] : counts)
        chi2 += (c - expected) * (c - expected) / expected;
    boost::math::chi_squared dist(11);
    EXPECT_LT(chi2, boost::math::quantile(boost::math::complement(dist, 1e-3)));
}
