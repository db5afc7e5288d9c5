#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "embounds/rng.hpp"
#include "embounds/scenario.hpp"
#include "embounds/scenario_gen.hpp"

namespace testutil {

using namespace embounds;

// Reference transfer evaluation on the push-through form
//     H = H0 + A * Phi * (I - Gamma*Phi)^-1 * B,
// with an explicit inverse. Deliberately not the factorization path the
// library uses, so agreement is meaningful.
inline CMatrix transfer_oracle(const ScenarioModel& m, const LoadVector& r) {
    const CMatrix phi = CMatrix(r.loads.asDiagonal());
    const CMatrix inner =
        CMatrix::Identity(m.n_s, m.n_s) - m.gamma * phi;
    return m.h0 + m.a * phi * inner.inverse() * m.b;
}

inline ScenarioModel random_scenario(int n_t, int n_r, int n_s,
                                     double coupling, std::uint64_t seed,
                                     double loss = 0.95) {
    ScenarioSpec sp;
    sp.n_t = n_t;
    sp.n_r = n_r;
    sp.n_s = n_s;
    sp.coupling_strength = coupling;
    sp.loss_factor = loss;
    sp.seed = seed;
    return generate(sp);
}

inline ControlVector random_bits(int n, Rng& rng) {
    ControlVector v = ControlVector::zeros(n);
    for (int i = 0; i < n; ++i) v.bits[i] = rng.bernoulli(0.5) ? 1 : 0;
    return v;
}

struct NaiveBest {
    ControlVector v;
    double value = 0.0;
    long long evaluations = 0;
};

// Plain binary counting over all 2^n configurations, a fresh dense solve
// per configuration. The slow oracle the fast enumeration must match.
inline NaiveBest naive_enumerate(
    const ScenarioModel& m,
    const std::function<double(const CMatrix&)>& score) {
    NaiveBest best;
    const int n = m.n_s;
    for (std::uint64_t word = 0; word < (std::uint64_t{1} << n); ++word) {
        ControlVector v = ControlVector::zeros(n);
        for (int i = 0; i < n; ++i) v.bits[i] = (word >> i) & 1u;
        const double val = score(transfer(m, encode(v, m)).h);
        ++best.evaluations;
        if (best.v.bits.empty() || val > best.value) {
            best.value = val;
            best.v = v;
        }
    }
    return best;
}

}  // namespace testutil
