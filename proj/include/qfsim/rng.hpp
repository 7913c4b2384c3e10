#pragma once

#include <cstdint>

namespace qfsim {

namespace detail {

// splitmix64 finalizer; full-avalanche bijection on 64 bits.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

// Stream identifiers; folded into the counter key so draws taken for
// different purposes never collide.
enum class RngPurpose : std::uint64_t {
    fluctuation_fire = 1,
    fluctuation_pick = 2,
    outcome = 3,
    path_select = 4,
    combo_select = 5,
    trial = 6,
    scratch = 7,
};

// Counter-based generator: every draw is a pure function of
// (seed, purpose, k0, k1, draw index). Streams for distinct keys are
// independent of evaluation order, so parallel workers reproduce the
// single-threaded sequence exactly.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, RngPurpose purpose, std::uint64_t k0 = 0,
               std::uint64_t k1 = 0)
        : seed_(seed), purpose_(static_cast<std::uint64_t>(purpose)), k0_(k0), k1_(k1) {}

    std::uint64_t next_u64() {
        std::uint64_t h = detail::mix64(seed_);
        h = detail::mix64(h ^ purpose_);
        h = detail::mix64(h ^ k0_);
        h = detail::mix64(h ^ k1_);
        h = detail::mix64(h ^ ctr_++);
        return h;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n); n >= 1.
    std::uint64_t uniform_under(std::uint64_t n) {
        // Rejection-free modulo is fine here: n is tiny against 2^64.
        return next_u64() % n;
    }

private:
    std::uint64_t seed_;
    std::uint64_t purpose_;
    std::uint64_t k0_;
    std::uint64_t k1_;
    std::uint64_t ctr_ = 0;
};

} // namespace qfsim
