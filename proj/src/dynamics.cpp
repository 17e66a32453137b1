#include "mnf/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mnf/parallel.hpp"
#include "mnf/stats.hpp"
#include "mnf/walk.hpp"

namespace mnf {
namespace {

std::uint64_t threshold_of(double p)
{
    if (!(p > 0))
        return 0;
    double const t = std::ldexp(p, 64);
    if (t >= 0x1.0p64)
        return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(t);
}

[[noreturn]] void exhausted(std::uint64_t a_max)
{
    std::ostringstream os;
    os << "a token reached a_max=" << a_max
       << "; rebuild the forgetting schedule with a larger a_max";
    throw ScheduleExhausted(os.str());
}

}  // namespace

Displacement LinkSnapshot::offset(std::size_t i) const
{
    auto const first = offsets.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(k));
    return Displacement(std::vector<std::int64_t>(first, first + k));
}

Coord LinkSnapshot::contact(std::size_t i, LatticeConfig const& cfg) const
{
    return translate(cfg.coord_of(i), offset(i), cfg);
}

//---------------------------------------------------------------------------//

World::World(LatticeConfig const& cfg, SchedulePtr schedule, std::uint64_t n_tokens,
             std::uint64_t seed, DynamicsOptions opts)
    : cfg_(cfg), schedule_(std::move(schedule)), opts_(opts), seed_(seed)
{
    if (!schedule_)
        throw std::invalid_argument("World: null schedule");
    if (n_tokens < 1)
        throw std::invalid_argument("World: need at least one token");
    if (n_tokens > cfg_.node_count())
        throw std::invalid_argument("World: more tokens than torus nodes");
    if (opts_.shard_size < 1)
        throw std::invalid_argument("World: shard size must be positive");

    ages_.assign(n_tokens, 0);
    disp_.assign(n_tokens * static_cast<std::uint64_t>(cfg_.k()), 0);
    std::uint64_t const n_shards = (n_tokens + opts_.shard_size - 1) / opts_.shard_size;
    shards_.resize(n_shards);
    for (std::uint64_t s = 0; s < n_shards; ++s)
        shards_[s].rng = make_stream(seed, Stream::dynamics_shard, s, 0);

    auto const phis = schedule_->phi_table();
    forget_threshold_.resize(phis.size());
    for (std::size_t a = 0; a < phis.size(); ++a)
        forget_threshold_[a] = threshold_of(phis[a]);
}

World World::fresh(LatticeConfig const& cfg, SchedulePtr schedule, std::uint64_t n_tokens,
                   std::uint64_t seed, DynamicsOptions opts)
{
    return World(cfg, std::move(schedule), n_tokens, seed, opts);
}

World World::stationary(LatticeConfig const& cfg, SchedulePtr schedule,
                        std::uint64_t n_tokens, std::uint64_t seed, DynamicsOptions opts)
{
    World w(cfg, std::move(schedule), n_tokens, seed, opts);
    int const k = cfg.k();
    parallel_for(w.shards_.size(), worker_count(), [&](std::size_t s) {
        Rng rng = make_stream(seed, Stream::dynamics_shard, s, 1);
        std::uint64_t const lo = s * w.opts_.shard_size;
        std::uint64_t const hi = std::min(lo + w.opts_.shard_size, w.size());
        for (std::uint64_t i = lo; i < hi; ++i)
        {
            std::uint64_t const a = sample_age(*w.schedule_, rng);
            w.ages_[i] = a;
            Displacement d = w.opts_.lazy_walk ? sample_displacement(2 * a, k, rng)
                                               : sample_displacement(a, k, rng);
            for (int j = 0; j < k; ++j)
                w.disp_[i * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(j)] =
                    w.opts_.lazy_walk ? d[j] / 2 : d[j];
        }
    });
    return w;
}

void World::advance(std::uint64_t ticks, unsigned workers)
{
    if (ticks == 0)
        return;
    parallel_for(shards_.size(), std::max(1u, workers),
                 [&](std::size_t s) { advance_shard(s, ticks); });
    ticks_ += ticks;
}

void World::advance_shard(std::size_t s, std::uint64_t ticks)
{
    Shard& sh = shards_[s];
    std::uint64_t const lo = s * opts_.shard_size;
    std::uint64_t const hi = std::min(lo + opts_.shard_size, size());
    auto const k = static_cast<std::uint64_t>(cfg_.k());
    std::uint64_t const a_max = schedule_->a_max();
    std::uint64_t const* thr = forget_threshold_.data();
    std::uint64_t const n_thr = forget_threshold_.size();
    bool const lazy = opts_.lazy_walk;
    std::uint64_t* ages = ages_.data();
    std::int64_t* disp = disp_.data();

    // Local copies: stores through ages/disp could otherwise alias the
    // generator state and force it back to memory on every draw.
    Rng rng = sh.rng;
    std::uint64_t bits = sh.bits;
    int bits_left = sh.bits_left;
    // Random bits are taken from a pool refilled one 64-bit draw at a time;
    // leftover bits too few for a request are discarded.
    auto take = [&](int n) -> std::uint64_t {
        if (bits_left < n)
        {
            bits = rng();
            bits_left = 64;
        }
        std::uint64_t const v = bits & ((std::uint64_t{1} << n) - 1);
        bits >>= n;
        bits_left -= n;
        return v;
    };

    for (std::uint64_t t = 0; t < ticks; ++t)
    {
        for (std::uint64_t i = lo; i < hi; ++i)
        {
            std::uint64_t const a = ages[i] + 1;
            if (a > a_max)
            {
                sh.rng = rng;
                sh.bits = bits;
                sh.bits_left = bits_left;
                exhausted(a_max);
            }
            std::uint64_t const th = a < n_thr ? thr[a] : threshold_of(schedule_->phi(a));
            // u < th for a uniform 64-bit u, compared 16 leading bits first;
            // the other 48 are drawn only on a tie.
            std::uint64_t const u_hi = take(16);
            std::uint64_t const th_hi = th >> 48;
            bool forget = u_hi < th_hi;
            if (u_hi == th_hi) [[unlikely]]
                forget = (rng() >> 16) < (th & 0xFFFF'FFFF'FFFFu);

            // Step bits are consumed whether or not the token survives.
            ages[i] = forget ? 0 : a;
            std::int64_t* d = disp + i * k;
            for (std::uint64_t j = 0; j < k; ++j)
            {
                std::int64_t step = 2 * static_cast<std::int64_t>(take(1)) - 1;
                if (lazy)
                    step &= -static_cast<std::int64_t>(take(1));
                d[j] = forget ? 0 : d[j] + step;
            }
        }
    }
    sh.rng = rng;
    sh.bits = bits;
    sh.bits_left = bits_left;
}

Token World::token(std::uint64_t i) const
{
    if (i >= size())
        throw std::out_of_range("World::token: index out of range");
    auto const k = static_cast<std::uint64_t>(cfg_.k());
    auto const first = disp_.begin() + static_cast<std::ptrdiff_t>(i * k);
    return Token{cfg_.coord_of(i),
                 Displacement(std::vector<std::int64_t>(first, first + static_cast<std::ptrdiff_t>(k))),
                 ages_[i]};
}

LinkSnapshot World::snapshot_links() const
{
    LinkSnapshot snap;
    snap.k = cfg_.k();
    snap.offsets.resize(disp_.size());
    std::transform(disp_.begin(), disp_.end(), snap.offsets.begin(),
                   [&](std::int64_t v) { return cfg_.reduce_signed(v); });
    return snap;
}

std::uint64_t World::find_invalid_token() const
{
    auto const k = static_cast<std::uint64_t>(cfg_.k());
    for (std::uint64_t i = 0; i < size(); ++i)
    {
        std::uint64_t const a = ages_[i];
        if (a > schedule_->a_max())
            return i;
        for (std::uint64_t j = 0; j < k; ++j)
        {
            std::int64_t const v = disp_[i * k + j];
            auto const av = static_cast<std::uint64_t>(v < 0 ? -v : v);
            if (av > a)
                return i;
            if (!opts_.lazy_walk && ((a - av) & 1u) != 0)
                return i;
        }
    }
    return size();
}

//---------------------------------------------------------------------------//
// Checkpoints
//---------------------------------------------------------------------------//

void World::write_checkpoint(std::ostream& os) const
{
    auto const old = os.precision(17);
    os << "# mnf world checkpoint v1\n"
       << "k " << cfg_.k() << '\n'
       << "side " << cfg_.side() << '\n'
       << "epsilon " << schedule_->epsilon() << '\n'
       << "a_max " << schedule_->a_max() << '\n'
       << "seed " << seed_ << '\n'
       << "ticks " << ticks_ << '\n'
       << "tokens " << size() << '\n'
       << "shard_size " << opts_.shard_size << '\n'
       << "lazy_walk " << (opts_.lazy_walk ? 1 : 0) << '\n';
    os.precision(old);
    for (std::size_t s = 0; s < shards_.size(); ++s)
        os << "shard " << s << ' ' << shards_[s].bits << ' ' << shards_[s].bits_left << ' '
           << shards_[s].rng << '\n';
    auto const k = static_cast<std::uint64_t>(cfg_.k());
    for (std::uint64_t i = 0; i < size(); ++i)
    {
        os << ages_[i];
        for (std::uint64_t j = 0; j < k; ++j)
            os << ' ' << disp_[i * k + j];
        os << '\n';
    }
}

World World::read_checkpoint(std::istream& is, LatticeConfig const& cfg, SchedulePtr schedule)
{
    std::string line;
    if (!std::getline(is, line) || line != "# mnf world checkpoint v1")
        throw std::invalid_argument("checkpoint: unrecognized header");

    auto expect = [&](char const* key) {
        std::string name;
        if (!(is >> name) || name != key)
            throw std::invalid_argument(std::string("checkpoint: expected '") + key + "'");
    };
    int k;
    std::int64_t side;
    double epsilon;
    std::uint64_t a_max, seed, ticks, n, shard_size;
    int lazy;
    expect("k");
    is >> k;
    expect("side");
    is >> side;
    expect("epsilon");
    is >> epsilon;
    expect("a_max");
    is >> a_max;
    expect("seed");
    is >> seed;
    expect("ticks");
    is >> ticks;
    expect("tokens");
    is >> n;
    expect("shard_size");
    is >> shard_size;
    expect("lazy_walk");
    is >> lazy;
    if (!is)
        throw std::invalid_argument("checkpoint: malformed header");
    if (k != cfg.k() || side != cfg.side())
        throw std::invalid_argument("checkpoint: lattice does not match");
    if (!schedule || schedule->a_max() != a_max
        || std::fabs(schedule->epsilon() - epsilon) > 1e-15 * epsilon)
        throw std::invalid_argument("checkpoint: forgetting schedule does not match");

    World w(cfg, std::move(schedule), n, seed, DynamicsOptions{shard_size, lazy != 0});
    w.ticks_ = ticks;
    for (std::size_t s = 0; s < w.shards_.size(); ++s)
    {
        std::size_t idx;
        expect("shard");
        is >> idx >> w.shards_[s].bits >> w.shards_[s].bits_left >> w.shards_[s].rng;
        if (!is || idx != s)
            throw std::invalid_argument("checkpoint: malformed shard record");
    }
    auto const kk = static_cast<std::uint64_t>(k);
    for (std::uint64_t i = 0; i < n; ++i)
    {
        is >> w.ages_[i];
        for (std::uint64_t j = 0; j < kk; ++j)
            is >> w.disp_[i * kk + j];
    }
    if (!is)
        throw std::invalid_argument("checkpoint: truncated token records");
    if (w.find_invalid_token() != w.size())
        throw std::invalid_argument("checkpoint: token violates parity or range invariants");
    return w;
}

bool World::operator==(World const& o) const
{
    if (cfg_.k() != o.cfg_.k() || cfg_.side() != o.cfg_.side() || seed_ != o.seed_
        || ticks_ != o.ticks_ || opts_.shard_size != o.opts_.shard_size
        || opts_.lazy_walk != o.opts_.lazy_walk || ages_ != o.ages_ || disp_ != o.disp_
        || shards_.size() != o.shards_.size())
        return false;
    for (std::size_t s = 0; s < shards_.size(); ++s)
    {
        if (!(shards_[s].rng == o.shards_[s].rng) || shards_[s].bits != o.shards_[s].bits
            || shards_[s].bits_left != o.shards_[s].bits_left)
            return false;
    }
    return true;
}

//---------------------------------------------------------------------------//
// Diagnostics
//---------------------------------------------------------------------------//

std::size_t age_bin(std::uint64_t a)
{
    if (a < 16)
        return static_cast<std::size_t>(a);
    return 12 + static_cast<std::size_t>(std::bit_width(a)) - 1;
}

std::pair<std::uint64_t, std::uint64_t> age_bin_range(std::size_t bin)
{
    if (bin >= kAgeBins)
        throw std::out_of_range("age_bin_range: no such bin");
    if (bin < 16)
        return {bin, bin};
    auto const j = static_cast<unsigned>(bin - 12);
    std::uint64_t const lo = std::uint64_t{1} << j;
    std::uint64_t const hi = j == 63 ? std::numeric_limits<std::uint64_t>::max() : (lo << 1) - 1;
    return {lo, hi};
}

std::vector<std::uint64_t> age_histogram(std::span<const std::uint64_t> ages)
{
    std::vector<std::uint64_t> h(kAgeBins, 0);
    for (auto a : ages)
        ++h[age_bin(a)];
    return h;
}

std::vector<double> age_reference(ForgettingSchedule const& schedule)
{
    std::vector<double> p(kAgeBins, 0.0);
    double const total = schedule.truncated_mass();
    for (std::size_t b = 0; b < kAgeBins; ++b)
    {
        auto const [lo, hi] = age_bin_range(b);
        p[b] = schedule.mass(lo, hi) / total;
    }
    return p;
}

double age_tv_distance(World const& world)
{
    auto const counts = age_histogram(world.ages());
    std::vector<double> emp(counts.size());
    for (std::size_t b = 0; b < counts.size(); ++b)
        emp[b] = static_cast<double>(counts[b]) / static_cast<double>(world.size());
    return tv_distance(emp, age_reference(world.schedule()));
}

LengthHistogram length_histogram(World const& world, bool radial)
{
    LengthHistogram h;
    auto const k = static_cast<std::size_t>(world.lattice().k());
    auto const disp = world.displacements();
    for (std::size_t i = 0; i < world.size(); ++i)
    {
        auto const first = disp.begin() + static_cast<std::ptrdiff_t>(i * k);
        std::vector<std::int64_t> key(first, first + static_cast<std::ptrdiff_t>(k));
        if (radial)
        {
            std::int64_t m = 0;
            for (auto v : key)
                m = std::max(m, v < 0 ? -v : v);
            key.assign(1, m);
        }
        ++h[key];
    }
    return h;
}

void write_histogram_csv(std::ostream& os, LengthHistogram const& hist)
{
    os << "bin,count\n";
    for (auto const& [key, count] : hist)
    {
        for (std::size_t j = 0; j < key.size(); ++j)
            os << (j ? ";" : "") << key[j];
        os << ',' << count << '\n';
    }
}

}  // namespace mnf
