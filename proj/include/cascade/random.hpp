#pragma once

#include <cstdint>
#include <limits>

namespace cascade {

/**
 * Counter-based random stream. Output k is a bijective mix of (key, k), so a
 * stream is fully determined by its key and can be split into independent
 * child streams without shared state.
 */
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t seed = 0) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return mix(key_ + (counter_++) * kGamma); }

    /// Independent stream indexed by `index`; does not advance this stream.
    RandomStream split(std::uint64_t index) const {
        RandomStream child;
        child.key_ = mix(key_ ^ mix(index + kGamma));
        return child;
    }

    /// Uniform integer in [0, bound), bound > 0, without modulo bias.
    std::uint64_t below(std::uint64_t bound) {
        std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t x = (*this)();
            unsigned __int128 prod = static_cast<unsigned __int128>(x) * bound;
            if (static_cast<std::uint64_t>(prod) >= threshold)
                return static_cast<std::uint64_t>(prod >> 64);
        }
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    std::uint64_t counter() const { return counter_; }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

} // namespace cascade
