#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace scalelab {

// All randomness in a run flows through one of these. Distributions are
// hand-rolled so a seed fully determines the draw sequence regardless of
// standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    std::uint64_t uniform_int(std::uint64_t n) { return engine_() % n; }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    // Knuth's product method; large means are split so exp(-mean) never underflows.
    int poisson(double mean) {
        int count = 0;
        while (mean > 256.0) {
            count += poisson_small(256.0);
            mean -= 256.0;
        }
        return count + poisson_small(mean);
    }

private:
    int poisson_small(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

    std::mt19937_64 engine_;
};

}  // namespace scalelab
