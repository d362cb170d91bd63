#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace glassmem {

using Rng = std::mt19937_64;

// 128-bit seed used to key an independent random stream.
struct Seed128 {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    friend bool operator==(const Seed128&, const Seed128&) = default;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Stream seed for trial `index` of stream `stream` under `base_seed`.
// Pure function of its arguments; distinct (stream, index) pairs give
// statistically independent streams.
Seed128 derive_seed(std::uint64_t base_seed, std::string_view stream, std::uint64_t index) noexcept;

// 64-bit projection, for APIs that take a plain integer seed.
std::uint64_t fold_seed(const Seed128& seed) noexcept;

Rng make_rng(std::uint64_t seed);
Rng make_rng(const Seed128& seed);

inline Rng trial_rng(std::uint64_t base_seed, std::string_view stream, std::uint64_t index)
{
    return make_rng(derive_seed(base_seed, stream, index));
}

} // namespace glassmem
