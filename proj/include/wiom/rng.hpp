#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace wiom {

// splitmix64 step; used to whiten seed material before it reaches an engine.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from a base seed plus up to two stream ids
// (e.g. snapshot index and base-station index). Plain arithmetic on the seed is
// not enough: nearby seeds would produce correlated mt19937 states.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s ^= 0x517cc1b727220a95ull * (a + 1);
    h ^= splitmix64(s);
    s ^= 0x2545f4914f6cdd1dull * (b + 1);
    h ^= splitmix64(s);
    return h;
}

// Deterministic random source. mt19937_64 supplies raw bits; the mappings to
// uniform/gaussian values are spelled out here because the std <random>
// distributions are implementation-defined and would break cross-platform
// byte-identical reruns.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Modulo bias is below 2^-50 for any n that fits
    // in memory, far below anything observable in these pipelines.
    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    // Standard normal via Box-Muller; caches the second value of each pair.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log1p(-u1)); // log(1-u1), safe since u1 < 1
        double t = 2.0 * M_PI * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    // Circularly symmetric complex gaussian with unit total variance.
    std::complex<double> complex_gaussian() {
        return {gaussian() * M_SQRT1_2, gaussian() * M_SQRT1_2};
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace wiom
