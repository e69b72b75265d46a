#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

// Small seeded generators for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed = 0x5eed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }
    std::complex<double> phasor(double max_mag) {
        return std::polar(uniform(0.0, max_mag), uniform(-3.14159, 3.14159));
    }

private:
    std::mt19937_64 rng_;
};
