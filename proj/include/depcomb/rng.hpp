#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace depcomb {

// 64-bit mixing (splitmix64 finalizer). Used to derive independent
// substreams from (seed, index...) so replicate b always sees the same
// stream regardless of scheduling.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a) {
    return mix64(mix64(seed) ^ a);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix64(derive_seed(seed, a) ^ mix64(b + 0x632be59bd9b4e019ULL));
}

// Deterministic RNG with portable output: the engine is the standard
// mt19937_64 (bit-exact per the C++ standard) and all variate transforms
// are implemented here rather than via std distributions, whose output is
// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}

    static Rng stream(std::uint64_t seed, std::uint64_t a) {
        return Rng(derive_seed(seed, a));
    }
    static Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
        return Rng(derive_seed(seed, a, b));
    }

    std::uint64_t next_u64() { return eng_(); }

    // Uniform on the open interval (0,1).
    double uniform() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal();          // inverse-CDF transform, see rng-normal in special_fns
    double exponential() ;
    double cauchy();
    double gamma(double shape);
    int bernoulli(double p) { return uniform() < p ? 1 : 0; }
    int binomial(int n, double p);

    // index uniform on [0, n)
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace depcomb
