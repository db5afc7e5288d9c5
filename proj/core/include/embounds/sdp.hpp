#pragma once

#include <optional>
#include <string>
#include <vector>

#include "embounds/common.hpp"
#include "embounds/lift.hpp"
#include "embounds/sdp_problem.hpp"

namespace embounds {

/// Tuning knobs for the interior-point solver.
struct SdpOptions {
    double tol_feas = 1e-8;      ///< residual tolerance, relative
    double tol_gap = 1e-8;       ///< duality-gap tolerance, relative
    int max_iterations = 200;
    int max_dim = 600;           ///< refuse problems with a larger PSD block
    bool verbose = false;        ///< per-iteration trace on stderr
};

enum class SolverStatus {
    optimal,
    max_iterations,
    infeasible,
    numerical_failure,
};

std::string to_string(SolverStatus s);

struct SdpSolution {
    RMatrix m_opt;               ///< primal PSD matrix
    double objective = 0.0;      ///< tr(C * m_opt)
    SolverStatus status = SolverStatus::numerical_failure;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double duality_gap = 0.0;    ///< relative complementarity gap
    int iterations = 0;
    RVector dual_y;              ///< multipliers, one per kept constraint row
    std::optional<RMatrix> dual_z;
    double dual_objective = 0.0;
    std::string message;
    /// Rows removed by presolve (duplicates of earlier rows), original indices.
    std::vector<int> dropped_constraints;
};

/// Solve max tr(C M) s.t. tr(A_k M) = b_k, M >= 0, via a homogeneous
/// self-dual embedding. Always returns; inspect `status`.
SdpSolution solve(const RealSdpData& problem, const SdpOptions& opts = {});

/// Complex-valued view of a solution of an embedded lift.
struct ComplexBlocks {
    CMatrix y_mat;   ///< moment block, dim x dim
    CVector y_vec;   ///< linear block (last column, scaled)
    double sigma = 1.0;
};

/// Undo the realification: average the doubled blocks back into a complex
/// Hermitian matrix and split off the corner. Throws NumericalError when the
/// doubled blocks disagree beyond tolerance (solver returned garbage).
ComplexBlocks extract_blocks(const SdpSolution& sol, const LiftedProblem& lp);

}  // namespace embounds
