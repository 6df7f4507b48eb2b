#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace dcgme {

    // Deterministic random source. Distributions are hand-rolled on top of
    // mt19937_64 so every call consumes a fixed number of engine draws and
    // results do not depend on the standard library implementation.
    class Rng {
    public:
        explicit Rng(std::uint64_t seed) : _gen(seed) {}

        // uniform in [0, 1)
        double uniform() { return static_cast<double>(_gen() >> 11) * 0x1.0p-53; }

        double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

        // standard normal (Box-Muller, cosine branch); exactly two engine draws
        double gaussian()
        {
            double u1 = static_cast<double>((_gen() >> 11) + 1) * 0x1.0p-53; // (0, 1]
            double u2 = uniform();
            return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        }

        double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

        // uniform index in [0, n); modulo bias is < n / 2^64
        std::uint64_t uniform_index(std::uint64_t n) { return _gen() % n; }

        // child stream seeded by one draw from this stream
        Rng fork() { return Rng(_gen()); }

    private:
        std::mt19937_64 _gen;
    };

} // namespace dcgme
