#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "embounds/common.hpp"

namespace embounds {

// One-bit control word, one entry per tunable element. bit 0 selects the
// alpha load, bit 1 the beta load.
struct ControlVector {
    std::vector<int> bits;

    int size() const { return static_cast<int>(bits.size()); }
    std::string to_string() const;
    static ControlVector zeros(int n);
    static ControlVector from_string(const std::string& s);
};

// Complex reflection coefficients applied at the tunable ports.
struct LoadVector {
    CVector loads;

    int size() const { return static_cast<int>(loads.size()); }
};

// End-to-end channel matrix (n_r x n_t).
struct TransferMatrix {
    CMatrix h;
};

// Scattering description of a programmable environment, reduced to the four
// blocks that determine the input/output map:
//   h0    n_r x n_t  direct path
//   a     n_r x n_s  tunable ports -> receivers
//   gamma n_s x n_s  mutual coupling between tunable ports
//   b     n_s x n_t  transmitters -> tunable ports
// alpha/beta are the two realizable element loads.
struct ScenarioModel {
    int n_t = 0;
    int n_r = 0;
    int n_s = 0;
    CMatrix h0;
    CMatrix a;
    CMatrix gamma;
    CMatrix b;
    cxd alpha{0.0, 0.0};
    cxd beta{0.0, 0.0};

    bool passive = false;
    std::optional<std::uint64_t> seed;
    std::string tag;

    // Throws DimensionError / ValidationError on block-shape mismatches,
    // alpha == beta, or (when tagged passive) load magnitudes above 1 or an
    // assembled scattering block [[h0 a],[b gamma]] with spectral norm
    // above 1 + 1e-9.
    void validate() const;

    // [[h0 a],[b gamma]]: the joint scattering block seen from the
    // transmit/tunable ports, used by the passivity check.
    CMatrix assembled_scattering() const;
};

// r_i = beta where bit i is set, alpha elsewhere.
LoadVector encode(const ControlVector& v, const ScenarioModel& model);

// X = (I - Phi*Gamma)^-1 * Phi * B with Phi = diag(r); the per-element
// response the lifted problems operate on. Throws NumericalError when the
// resolvent's condition estimate exceeds cond_cap.
CMatrix element_response(const ScenarioModel& model, const LoadVector& r,
                         double cond_cap = 1e12);

// H(r) = H0 + A * X(r).
TransferMatrix transfer(const ScenarioModel& model, const LoadVector& r,
                        double cond_cap = 1e12);

// Absorbs the elements NOT in `used` (their loads fixed at alpha) into the
// direct path and the remaining blocks. `used` holds 0-based indices,
// strictly increasing. The returned model has n_s = used.size().
ScenarioModel reduce_fixed(const ScenarioModel& model,
                           const std::vector<int>& used);

double frobenius_sq(const TransferMatrix& h);

// |tr(h_des^H h)|^2 / (||h_des||_F^2 ||h||_F^2), in [0, 1].
// Throws ValidationError if either matrix is zero.
double fidelity(const TransferMatrix& h, const TransferMatrix& h_des);

// Diagonal similarity Gamma -> D Gamma D^-1, A -> A D^-1, B -> D B.
// Leaves transfer() invariant; used by the gauge-optimized norm bound.
ScenarioModel apply_gauge(const ScenarioModel& model, const CVector& d);

}  // namespace embounds
