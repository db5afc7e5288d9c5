#pragma once

#include "embounds/scenario.hpp"

namespace embounds {

// Incremental transfer evaluation under single-element load toggles.
//
// Caches the explicit resolvent inverse W = (I - Phi*Gamma)^-1 together with
// Phi*B, X = W*Phi*B, H and A*W. A toggle of element i is a rank-one change
// of the resolvent, so a probe costs O(n_s^2 + n_s*(n_t + n_r)) instead of a
// fresh O(n_s^3) solve. Probes never mutate state; commit(i) folds the
// toggle into every cache via the same rank-one identities.
//
// When the Sherman-Morrison denominator collapses (|d| < 1e-14, a resonant
// toggle) the evaluator falls back to a full recomputation and records that
// in fallback_used(). Caches are also rebuilt from scratch every few
// thousand commits, which keeps long toggle chains from accumulating drift.
class FlipEvaluator {
public:
    FlipEvaluator(const ScenarioModel& model, LoadVector r0,
                  double cond_cap = 1e12);

    const CMatrix& h() const { return h_; }
    const LoadVector& loads() const { return r_; }
    const ScenarioModel& model() const { return *model_; }

    // H after toggling element i between alpha and beta; state unchanged.
    CMatrix flipped_h(int i) const;

    // Folds the toggle of element i into the cached state.
    void commit(int i);

    bool fallback_used() const { return fallback_used_; }
    std::uint64_t commits() const { return total_commits_; }

    // Recomputes all caches from the current loads.
    void refresh();

private:
    struct FlipUpdate {
        CVector u;          // W e_i
        Eigen::RowVectorXcd v;  // Gamma.row(i) * W
        Eigen::RowVectorXcd x_row;  // rank-one row update of X
        cxd c{0.0, 0.0};
        cxd delta{0.0, 0.0};
        bool degenerate = false;
    };
    FlipUpdate plan_flip(int i) const;

    const ScenarioModel* model_;
    double cond_cap_;
    LoadVector r_;
    CMatrix w_;       // (I - Phi*Gamma)^-1
    CMatrix phi_b_;   // Phi*B
    CMatrix x_;       // W*Phi*B
    CMatrix h_;       // H0 + A*X
    CMatrix aw_;      // A*W
    std::uint64_t commits_since_refresh_ = 0;
    std::uint64_t total_commits_ = 0;
    mutable bool fallback_used_ = false;

    static constexpr double kDenominatorFloor = 1e-14;
    static constexpr std::uint64_t kRefreshPeriod = 4096;
};

}  // namespace embounds
