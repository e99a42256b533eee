#pragma once

// Seeded pseudo-random generation.
//
// Generator: xoshiro256** (Blackman & Vigna, 2018). State initialisation and
// stream splitting:
//
//   key  = mix64(master_seed) ^ mix64(stream_index + 0x9E3779B97F4A7C15)
//   s[i] = splitmix64 output i (i = 0..3) of a splitmix64 sequence started at key
//
// where mix64 is the splitmix64 finaliser. Doubles are formed from the top 53
// bits of each 64-bit output. Everything here is integer arithmetic, so a
// (master_seed, stream_index) pair maps to the same uniform sequence on every
// platform.

#include <array>
#include <cstdint>
#include <initializer_list>

namespace bayes_arbiter {

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct RngSeed {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;

    /// Deterministic sub-stream keyed by a list of tags (replica, condition, ...).
    RngSeed child(std::initializer_list<std::uint64_t> tags) const noexcept {
        std::uint64_t s = mix64(stream_index ^ 0xD1B54A32D192ED03ULL);
        for (auto t : tags) s = mix64(s + 0x9E3779B97F4A7C15ULL + mix64(t));
        return {master_seed, s};
    }

    friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(RngSeed seed) noexcept : seed_(seed) {
        std::uint64_t x = mix64(seed.master_seed) ^ mix64(seed.stream_index + 0x9E3779B97F4A7C15ULL);
        for (auto& word : state_) {
            x += 0x9E3779B97F4A7C15ULL;
            word = mix64(x);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    const RngSeed& seed() const noexcept { return seed_; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    RngSeed seed_;
    std::array<std::uint64_t, 4> state_{};
};

inline double draw_uniform(Rng& rng) noexcept { return rng.uniform(); }

} // namespace bayes_arbiter
