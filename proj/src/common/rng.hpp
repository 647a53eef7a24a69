#pragma once

#include <cstdint>
#include <random>

namespace pokeai {

// Seeded random source shared by every stochastic component.
//
// Every logical draw consumes exactly one 64-bit word from the engine, so
// draw counts are stable and sequences are bit-identical across platforms
// (std::uniform_int_distribution is implementation-defined and is not used).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() {
        ++draws_;
        return engine_();
    }

    // Uniform integer in [lo, hi] by multiply-high reduction.
    int uniform_int(int lo, int hi);

    // Uniform double in [0, 1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    std::uint64_t draws() const { return draws_; }

    // Independent, reproducible child seed for (master, stream, index).
    static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                     std::uint64_t index);

private:
    std::mt19937_64 engine_;
    std::uint64_t draws_ = 0;
};

// Stream identifiers for derive_seed.
namespace streams {
inline constexpr std::uint64_t kEncounter = 1;
inline constexpr std::uint64_t kBattle = 2;
inline constexpr std::uint64_t kPolicy = 3;
}  // namespace streams

}  // namespace pokeai
