#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "embounds/quad_form.hpp"
#include "embounds/scenario.hpp"
#include "embounds/sdp_problem.hpp"

namespace embounds {

enum class LiftKind { frobenius, charnes_cooper };

// Lifted QCQP over y = vec(X), X = (I - Phi*Gamma)^-1 Phi B.
//
// eq_constraints are complex equalities value(y) == 0 (binary-load products
// and cross-column repetition ties). For the Charnes-Cooper kind, the
// homogenization corner carries sigma instead of 1, `normalization` pins the
// scaled denominator to 1, and sigma_min keeps the corner away from zero.
struct LiftedProblem {
    int dim = 0;  // n_s * n_t
    QuadraticForm objective;
    std::vector<QuadraticForm> eq_constraints;
    LiftKind kind = LiftKind::frobenius;
    std::optional<QuadraticForm> normalization;
    double sigma_min = 0.0;

    int constraint_count() const {
        return static_cast<int>(eq_constraints.size()) +
               (normalization ? 1 : 0);
    }
};

// vec of the element response at loads r; the point the lift relaxes over.
CVector feasible_lift(const ScenarioModel& model, const LoadVector& r);

// ||H||_F^2 = y^H R0 y + 2 Re{q0^H y} + tau0 with R0 = I (x) A^H A,
// q0 = vec(A^H H0), tau0 = ||H0||_F^2.
QuadraticForm build_frobenius_objective(const ScenarioModel& model);

// One complex form per (s, t): (X_st - alpha Z_st)^* (X_st - beta Z_st) = 0
// where Z = B + Gamma X, written in y through sparse selectors.
std::vector<QuadraticForm> build_binary_constraints(const ScenarioModel& model);

// Two complex forms per (s, t != t0) tying element s's branch choice at
// column t to its choice at the anchor column t0. Empty when n_t == 1.
std::vector<QuadraticForm> build_repetition_constraints(
    const ScenarioModel& model, int t0 = 0);

// (numerator, denominator) of the fidelity ratio:
//   numerator   = |tr(H_des^H H)|^2   -> (q_des q_des^H, c0 q_des, |c0|^2)
//   denominator = ||H_des||_F^2 ||H||_F^2
// with c0 = tr(H_des^H H0), q_des = vec(A^H H_des).
std::pair<QuadraticForm, QuadraticForm> build_fidelity_forms(
    const ScenarioModel& model, const TransferMatrix& h_des);

struct LiftOptions {
    bool repetition = true;  // monotonicity tests solve with/without
};

LiftedProblem assemble_frobenius_sdp(const ScenarioModel& model,
                                     const LiftOptions& opts = {});

// Charnes-Cooper transformed fidelity relaxation. sigma_min is derived from
// the largest denominator over 100 random feasible configurations.
LiftedProblem assemble_cc_sdp(const ScenarioModel& model,
                              const TransferMatrix& h_des,
                              const LiftOptions& opts = {});

// Complex-to-real embedding. Each complex equality splits into its Hermitian
// and anti-Hermitian parts; every Hermitian matrix K maps to
// [[Re K, -Im K], [Im K, Re K]] / 2 so traces keep the complex convention;
// symmetry-coupling equalities tie the two diagonal copies; Charnes-Cooper
// problems get one extra diagonal slack entry enforcing corner >= sigma_min.
RealSdpData embed_real(const LiftedProblem& lp);

// [[Re K, -Im K], [Im K, Re K]] / 2 padded to real_dim; the cost block used
// by embed_real, exposed so callers can swap objectives without rebuilding
// the constraint rows.
RMatrix embed_hermitian_half(const CMatrix& k, int real_dim);

}  // namespace embounds
