#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "embounds/common.hpp"

namespace embounds {

// Deterministic random helper. mt19937_64 is fully specified by the
// standard and the derived draws below avoid std::*_distribution, whose
// output is implementation-defined, so streams reproduce bit-for-bit
// for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, bound) without modulo bias.
    std::uint64_t integer(std::uint64_t bound) {
        if (bound == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % bound;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via Box-Muller; second member of each pair cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

    // Circularly symmetric complex Gaussian with unit variance
    // (real and imaginary parts N(0, 1/2)).
    cxd cnormal() {
        static const double s = std::sqrt(0.5);
        return {s * normal(), s * normal()};
    }

    CMatrix cnormal_matrix(Eigen::Index rows, Eigen::Index cols) {
        CMatrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cnormal();
        return m;
    }

private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace embounds
