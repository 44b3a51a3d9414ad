#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace qsv {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic random stream. Uniform doubles are produced from the top 53
// bits of the generator output so results do not depend on the standard
// library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    double uniform() {  // [0, 1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Index into a cumulative distribution (cdf back element ~ 1).
    std::size_t categorical(const std::vector<double>& cdf) {
        double u = uniform();
        std::size_t lo = 0, hi = cdf.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (u < cdf[mid]) hi = mid; else lo = mid + 1;
        }
        return lo;
    }

private:
    std::mt19937_64 eng_;
};

// Counter-derived substream: independent, reproducible streams keyed by
// (seed, a, b) so parallel trial order cannot affect results.
inline Rng derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ (a + 0x9e3779b97f4a7c15ULL));
    s = splitmix64(s ^ (b + 0x7f4a7c159e3779b9ULL));
    return Rng(s);
}

}  // namespace qsv
