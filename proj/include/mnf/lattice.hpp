#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "mnf/rng.hpp"

namespace mnf {

//! Node of the torus; every component in [0, L).
struct Coord
{
    std::vector<std::int64_t> x;

    Coord() = default;
    explicit Coord(std::vector<std::int64_t> v) : x(std::move(v)) {}
    Coord(std::initializer_list<std::int64_t> v) : x(v) {}

    int dims() const { return static_cast<int>(x.size()); }
    std::int64_t operator[](int i) const { return x[static_cast<std::size_t>(i)]; }
    std::int64_t& operator[](int i) { return x[static_cast<std::size_t>(i)]; }

    auto operator<=>(Coord const&) const = default;
};

//! Signed lattice offset. Torus-minimal displacements have components in
//! (-L/2, L/2]; walk displacements are kept unwrapped.
struct Displacement
{
    std::vector<std::int64_t> x;

    Displacement() = default;
    explicit Displacement(std::vector<std::int64_t> v) : x(std::move(v)) {}
    Displacement(std::initializer_list<std::int64_t> v) : x(v) {}

    static Displacement zero(int k)
    {
        return Displacement(std::vector<std::int64_t>(static_cast<std::size_t>(k), 0));
    }

    int dims() const { return static_cast<int>(x.size()); }
    std::int64_t operator[](int i) const { return x[static_cast<std::size_t>(i)]; }
    std::int64_t& operator[](int i) { return x[static_cast<std::size_t>(i)]; }
    bool is_zero() const;

    auto operator<=>(Displacement const&) const = default;
};

std::string to_string(Coord const& c);
std::string to_string(Displacement const& d);

/*!
 * The k-dimensional torus Z_L^k standing in for Z^k.
 *
 * L must be even (so the all-coordinates-move walk keeps its parity classes
 * under wrapping) and at least 4. L^k must fit a 63-bit node index.
 */
class LatticeConfig
{
  public:
    LatticeConfig(int k, std::int64_t side);

    int k() const { return k_; }
    std::int64_t side() const { return side_; }
    std::int64_t half() const { return side_ / 2; }
    std::uint64_t node_count() const { return nodes_; }

    bool contains(Coord const& u) const;
    std::uint64_t index_of(Coord const& u) const;
    Coord coord_of(std::uint64_t index) const;

    //! Reduce an integer to [0, L).
    std::int64_t reduce(std::int64_t v) const
    {
        std::int64_t r = v % side_;
        return r < 0 ? r + side_ : r;
    }
    //! Reduce an integer to (-L/2, L/2].
    std::int64_t reduce_signed(std::int64_t v) const
    {
        std::int64_t r = reduce(v);
        return r > half() ? r - side_ : r;
    }

  private:
    int k_;
    std::int64_t side_;
    std::uint64_t nodes_;
};

//! Componentwise wrap-minimal v - u. Throws std::invalid_argument on a
//! dimension mismatch.
Displacement wrap_displacement(Coord const& u, Coord const& v,
                               LatticeConfig const& cfg);

//! Wrap an unwrapped offset onto (-L/2, L/2]^k.
Displacement wrap(Displacement const& d, LatticeConfig const& cfg);

//! (u + d) mod L.
Coord translate(Coord const& u, Displacement const& d, LatticeConfig const& cfg);

std::int64_t l1_distance(Coord const& u, Coord const& v, LatticeConfig const& cfg);
std::int64_t l1_norm(Displacement const& d);
std::int64_t linf_norm(Displacement const& d);

//! u +/- e_i for each dimension: dimension ascending, +1 before -1.
std::vector<Coord> grid_neighbors(Coord const& u, LatticeConfig const& cfg);

//! Number of points of Z^k at l1 norm exactly r (as a double; exact below 2^53).
double l1_sphere_size(int k, std::int64_t r);

//! Uniform point of Z^k with l1 norm exactly r.
Displacement sample_l1_sphere(int k, std::int64_t r, Rng& rng);

//! Uniform node of the torus.
Coord sample_node(LatticeConfig const& cfg, Rng& rng);

}  // namespace mnf
