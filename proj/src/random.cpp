#include "glassmem/random.hpp"

#include <array>

namespace glassmem {

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

std::uint64_t fnv1a(std::string_view s) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

Seed128 derive_seed(std::uint64_t base_seed, std::string_view stream, std::uint64_t index) noexcept
{
    const std::uint64_t name = fnv1a(stream);
    std::uint64_t a = splitmix64(base_seed ^ splitmix64(name));
    std::uint64_t b = splitmix64(a ^ splitmix64(index + 0x632be59bd9b4e019ULL));
    Seed128 out;
    out.hi = splitmix64(b ^ 0xd1b54a32d192ed03ULL);
    out.lo = splitmix64(out.hi ^ a ^ index);
    return out;
}

std::uint64_t fold_seed(const Seed128& seed) noexcept
{
    return splitmix64(seed.hi ^ splitmix64(seed.lo));
}

Rng make_rng(std::uint64_t seed)
{
    return make_rng(Seed128{splitmix64(seed), splitmix64(seed ^ 0xa0761d6478bd642fULL)});
}

Rng make_rng(const Seed128& seed)
{
    std::array<std::uint32_t, 4> words{
        static_cast<std::uint32_t>(seed.hi >> 32), static_cast<std::uint32_t>(seed.hi),
        static_cast<std::uint32_t>(seed.lo >> 32), static_cast<std::uint32_t>(seed.lo)};
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

} // namespace glassmem
