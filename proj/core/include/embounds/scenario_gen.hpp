#pragma once

#include <cstdint>

#include "embounds/scenario.hpp"

namespace embounds {

enum class ScenarioFamily { rich_scattering_like, free_space_like };

const char* to_string(ScenarioFamily f);
ScenarioFamily scenario_family_from_string(const std::string& s);

// Knobs for the synthetic reciprocal-environment generator.
struct ScenarioSpec {
    int n_t = 1;
    int n_r = 1;
    int n_s = 1;
    double coupling_strength = 0.0;  // target ||Gamma||_2, in [0, loss_factor)
    double loss_factor = 1.0;        // target ||S||_2, in (0, 1]
    cxd alpha{1.0, 0.0};
    cxd beta{-1.0, 0.0};
    std::uint64_t seed = 0;
    ScenarioFamily family = ScenarioFamily::rich_scattering_like;

    void validate() const;
};

// Draws a reciprocal (S = S^T) complex scattering matrix over the
// transmit/receive/tunable ports, steers it to ||S||_2 = loss_factor and
// ||Gamma||_2 = coupling_strength by alternating projection, and slices out
// the four model blocks. Deterministic in spec.seed.
ScenarioModel generate(const ScenarioSpec& spec);

enum class TargetKind { identity, cyclic_permutation, dft, random };

const char* to_string(TargetKind k);
TargetKind target_kind_from_string(const std::string& s);

// Unit-Frobenius-norm n x n target channels. `seed` only matters for
// TargetKind::random.
TransferMatrix target_operator(TargetKind kind, int n, std::uint64_t seed = 0);

}  // namespace embounds
