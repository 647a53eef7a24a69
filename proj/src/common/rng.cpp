#include "common/rng.hpp"

#include "common/errors.hpp"

namespace pokeai {

namespace {

__extension__ using u128 = unsigned __int128;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

int Rng::uniform_int(int lo, int hi) {
    expects(lo <= hi, "Rng::uniform_int: empty range");
    const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo + 1);
    const auto product = static_cast<u128>(next_u64()) * span;
    return lo + static_cast<int>(static_cast<std::uint64_t>(product >> 64));
}

std::uint64_t Rng::derive_seed(std::uint64_t master, std::uint64_t stream,
                               std::uint64_t index) {
    return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

}  // namespace pokeai
