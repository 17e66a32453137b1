#include "mnf/lattice.hpp"

#include <cstdlib>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mnf {
namespace {

void require_dims(int got, LatticeConfig const& cfg, char const* what)
{
    if (got != cfg.k())
    {
        std::ostringstream os;
        os << what << ": expected " << cfg.k() << " dimensions, got " << got;
        throw std::invalid_argument(os.str());
    }
}

template<class V>
std::string join(V const& v)
{
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i)
        os << (i ? "," : "") << v[i];
    os << ')';
    return os.str();
}

}  // namespace

bool Displacement::is_zero() const
{
    for (auto c : x)
        if (c != 0)
            return false;
    return true;
}

std::string to_string(Coord const& c) { return join(c.x); }
std::string to_string(Displacement const& d) { return join(d.x); }

LatticeConfig::LatticeConfig(int k, std::int64_t side) : k_(k), side_(side)
{
    if (k < 1)
        throw std::invalid_argument("lattice dimension k must be >= 1");
    if (side < 4 || side % 2 != 0)
        throw std::invalid_argument("torus side L must be even and >= 4");

    constexpr auto limit = static_cast<std::uint64_t>(
        std::numeric_limits<std::int64_t>::max());
    std::uint64_t n = 1;
    for (int i = 0; i < k; ++i)
    {
        if (n > limit / static_cast<std::uint64_t>(side))
            throw std::invalid_argument("torus L^k exceeds 63-bit node index");
        n *= static_cast<std::uint64_t>(side);
    }
    nodes_ = n;
}

bool LatticeConfig::contains(Coord const& u) const
{
    if (u.dims() != k_)
        return false;
    for (auto c : u.x)
        if (c < 0 || c >= side_)
            return false;
    return true;
}

std::uint64_t LatticeConfig::index_of(Coord const& u) const
{
    require_dims(u.dims(), *this, "index_of");
    std::uint64_t idx = 0;
    for (int i = 0; i < k_; ++i)
        idx = idx * static_cast<std::uint64_t>(side_)
              + static_cast<std::uint64_t>(u[i]);
    return idx;
}

Coord LatticeConfig::coord_of(std::uint64_t index) const
{
    Coord u(std::vector<std::int64_t>(static_cast<std::size_t>(k_)));
    for (int i = k_ - 1; i >= 0; --i)
    {
        u[i] = static_cast<std::int64_t>(index % static_cast<std::uint64_t>(side_));
        index /= static_cast<std::uint64_t>(side_);
    }
    return u;
}

Displacement wrap_displacement(Coord const& u, Coord const& v,
                               LatticeConfig const& cfg)
{
    require_dims(u.dims(), cfg, "wrap_displacement");
    require_dims(v.dims(), cfg, "wrap_displacement");
    Displacement d = Displacement::zero(cfg.k());
    for (int i = 0; i < cfg.k(); ++i)
        d[i] = cfg.reduce_signed(v[i] - u[i]);
    return d;
}

Displacement wrap(Displacement const& d, LatticeConfig const& cfg)
{
    require_dims(d.dims(), cfg, "wrap");
    Displacement w = d;
    for (auto& c : w.x)
        c = cfg.reduce_signed(c);
    return w;
}

Coord translate(Coord const& u, Displacement const& d, LatticeConfig const& cfg)
{
    require_dims(u.dims(), cfg, "translate");
    require_dims(d.dims(), cfg, "translate");
    Coord v = u;
    for (int i = 0; i < cfg.k(); ++i)
        v[i] = cfg.reduce(u[i] + cfg.reduce(d[i]));
    return v;
}

std::int64_t l1_distance(Coord const& u, Coord const& v, LatticeConfig const& cfg)
{
    require_dims(u.dims(), cfg, "l1_distance");
    require_dims(v.dims(), cfg, "l1_distance");
    std::int64_t s = 0;
    for (int i = 0; i < cfg.k(); ++i)
        s += std::llabs(cfg.reduce_signed(v[i] - u[i]));
    return s;
}

std::int64_t l1_norm(Displacement const& d)
{
    std::int64_t s = 0;
    for (auto c : d.x)
        s += std::llabs(c);
    return s;
}

std::int64_t linf_norm(Displacement const& d)
{
    std::int64_t m = 0;
    for (auto c : d.x)
        m = std::max<std::int64_t>(m, std::llabs(c));
    return m;
}

std::vector<Coord> grid_neighbors(Coord const& u, LatticeConfig const& cfg)
{
    require_dims(u.dims(), cfg, "grid_neighbors");
    std::vector<Coord> out;
    out.reserve(static_cast<std::size_t>(2 * cfg.k()));
    for (int i = 0; i < cfg.k(); ++i)
    {
        for (std::int64_t step : {1, -1})
        {
            Coord v = u;
            v[i] = cfg.reduce(u[i] + step);
            out.push_back(std::move(v));
        }
    }
    return out;
}

namespace {

// counts[j][s] = number of points of Z^j with l1 norm s, for s <= r.
std::vector<std::vector<double>> sphere_counts(int k, std::int64_t r)
{
    auto const width = static_cast<std::size_t>(r + 1);
    std::vector<std::vector<double>> counts(static_cast<std::size_t>(k + 1),
                                            std::vector<double>(width, 0.0));
    counts[0][0] = 1.0;
    for (std::size_t j = 1; j <= static_cast<std::size_t>(k); ++j)
    {
        // counts[j][s] = counts[j-1][s] + 2 * sum_{t<s} counts[j-1][t]
        double prefix = 0;
        for (std::size_t s = 0; s < width; ++s)
        {
            counts[j][s] = counts[j - 1][s] + 2.0 * prefix;
            prefix += counts[j - 1][s];
        }
    }
    return counts;
}

}  // namespace

double l1_sphere_size(int k, std::int64_t r)
{
    if (k < 1 || r < 0)
        throw std::invalid_argument("l1_sphere_size: need k >= 1, r >= 0");
    return sphere_counts(k, r)[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)];
}

Displacement sample_l1_sphere(int k, std::int64_t r, Rng& rng)
{
    if (k < 1 || r < 0)
        throw std::invalid_argument("sample_l1_sphere: need k >= 1, r >= 0");
    Displacement d = Displacement::zero(k);
    if (r == 0)
        return d;
    if (k == 1)
    {
        d[0] = (rng() & 1) ? r : -r;
        return d;
    }

    auto const counts = sphere_counts(k, r);
    std::int64_t remaining = r;
    for (int i = 0; i < k; ++i)
    {
        auto const rest = static_cast<std::size_t>(k - i - 1);
        std::int64_t t = remaining;
        if (rest > 0)
        {
            double const total = counts[rest + 1][static_cast<std::size_t>(remaining)];
            double u = uniform01(rng) * total;
            for (t = 0; t < remaining; ++t)
            {
                double w = (t == 0 ? 1.0 : 2.0)
                           * counts[rest][static_cast<std::size_t>(remaining - t)];
                if (u < w)
                    break;
                u -= w;
            }
        }
        if (t != 0 && (rng() & 1))
            t = -t;
        d[i] = t;
        remaining -= std::llabs(t);
    }
    return d;
}

Coord sample_node(LatticeConfig const& cfg, Rng& rng)
{
    Coord u(std::vector<std::int64_t>(static_cast<std::size_t>(cfg.k())));
    for (int i = 0; i < cfg.k(); ++i)
        u[i] = static_cast<std::int64_t>(
            uniform_below(rng, static_cast<std::uint64_t>(cfg.side())));
    return u;
}

}  // namespace mnf
