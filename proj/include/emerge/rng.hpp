#pragma once

// Counter-based random streams.
//
// A Stream is keyed by (Seed, stream id); the i-th output is a pure function
// of (key, i). Distinct stream ids give statistically independent sequences,
// so per-agent and per-chain draws do not depend on scheduling or on how many
// draws other streams have consumed.

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace emerge {

struct Seed {
    std::uint64_t value = 0;
};

namespace detail {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

}  // namespace detail

// Combine integer tags into a single stream id.
constexpr std::uint64_t stream_id(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x2545F4914F6CDD1DULL;
    for (auto p : parts) h = detail::mix64(h ^ (p + detail::kGolden));
    return h;
}

class Stream {
public:
    using result_type = std::uint64_t;

    Stream() : Stream(Seed{0}, 0) {}
    Stream(Seed seed, std::uint64_t id)
        : key_(detail::mix64(seed.value ^ detail::mix64(id + detail::kGolden))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        ++counter_;
        return detail::mix64(key_ + counter_ * detail::kGolden);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // Independent child stream; does not advance this stream.
    Stream child(std::uint64_t id) const { return Stream(Seed{key_}, id); }

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace emerge
