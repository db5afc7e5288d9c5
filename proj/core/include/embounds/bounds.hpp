#pragma once

#include <optional>
#include <string>

#include "embounds/common.hpp"
#include "embounds/scenario.hpp"
#include "embounds/sdp.hpp"

namespace embounds {

enum class BoundKind {
    frob_sdr,        ///< relaxation bound on max ||H(r)||_F^2
    frob_ni,         ///< closed-form norm-inequality bound on the same
    frob_nio,        ///< norm-inequality bound minimized over diagonal gauges
    fid_sdr,         ///< relaxation bound on max fidelity, clamped to [0,1]
    fid_sdr_raw,     ///< same, before clamping
    fid_bisection,   ///< fidelity bound via bisection on feasibility problems
};

std::string to_string(BoundKind k);
BoundKind bound_kind_from_string(const std::string& s);

/// Invertible diagonal rescaling of the tunable ports, d_j = exp(log_mag_j +
/// i*phase_j). Transfer is invariant under it; norm bounds are not.
struct DiagonalGauge {
    RVector log_mag;
    RVector phase;
    CVector diagonal() const;
};

struct BoundResult {
    BoundKind kind = BoundKind::frob_sdr;
    double value = 0.0;
    bool valid = false;              ///< safe to quote as a bound
    std::string note;
    std::optional<double> raw_value; ///< pre-clamp value where applicable
    std::optional<double> sigma;     ///< recovered corner of the moment matrix
    std::optional<double> eff_rank;  ///< effective rank of the moment block
    std::optional<DiagonalGauge> gauge;
    std::optional<ComplexBlocks> blocks;
    std::optional<SolverStatus> solver_status;
    int iterations = 0;
};

struct NioOptions {
    int max_iterations = 500;
    double fd_step = 1e-6;   ///< central-difference step
    double rel_tol = 1e-9;   ///< stop when the relative decrease drops below
};

struct BisectionOptions {
    double tol = 1e-3;       ///< width of the final bracket
    int max_iterations = 40;
};

BoundResult frob_sdr_bound(const ScenarioModel& model,
                           const SdpOptions& solver = {},
                           const LiftOptions& lift = {});

BoundResult frob_ni_bound(const ScenarioModel& model);

BoundResult frob_nio_bound(const ScenarioModel& model,
                           const NioOptions& opts = {});

BoundResult fid_sdr_bound(const ScenarioModel& model,
                          const TransferMatrix& h_des,
                          const SdpOptions& solver = {},
                          const LiftOptions& lift = {});

BoundResult fid_bisection_bound(const ScenarioModel& model,
                                const TransferMatrix& h_des,
                                const SdpOptions& solver = {},
                                const BisectionOptions& opts = {},
                                const LiftOptions& lift = {});

/// exp of the Shannon entropy of the normalized eigenvalue distribution.
/// Throws ValidationError for matrices that are not PSD (relative tolerance
/// `tol`) or identically zero.
double effective_rank(const CMatrix& psd, double tol = 1e-9);

}  // namespace embounds
