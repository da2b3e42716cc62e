#pragma once

#include <cstdint>
#include <string_view>

namespace dekg {

// xoshiro256** seeded through splitmix64. Self-contained so that streams are
// bit-reproducible across platforms and standard-library versions; <random>
// distributions are implementation-defined and would break that.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();

    // Uniform in [0, n), n > 0. Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n);

    // Uniform integer in [lo, hi] inclusive.
    std::int64_t range(std::int64_t lo, std::int64_t hi);

    // Uniform double in [0, 1).
    double uniform();
    double uniform(double lo, double hi);

    bool coin() { return (next() >> 63) != 0; }

    // Independent child stream derived from this stream's seed and a name.
    // Derivation does not consume parent state, so adding streams never
    // shifts the draws of existing ones.
    Rng stream(std::string_view name) const;
    Rng stream(std::uint64_t salt) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
};

}  // namespace dekg
