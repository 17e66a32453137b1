#include "mnf/rng.hpp"

namespace mnf {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, Stream domain,
                          std::uint64_t index, std::uint64_t sub)
{
    std::uint64_t h = mix(master + kGolden);
    h = mix(h ^ (static_cast<std::uint64_t>(domain) * kGolden));
    h = mix(h ^ (index + kGolden));
    h = mix(h ^ (sub + 2 * kGolden));
    return h;
}

}  // namespace mnf
