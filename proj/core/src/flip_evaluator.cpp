#include "embounds/flip_evaluator.hpp"

#include <Eigen/LU>

namespace embounds {

FlipEvaluator::FlipEvaluator(const ScenarioModel& model, LoadVector r0,
                             double cond_cap)
    : model_(&model), cond_cap_(cond_cap), r_(std::move(r0)) {
    if (r_.size() != model.n_s)
        throw DimensionError("load vector length does not match n_s");
    refresh();
}

void FlipEvaluator::refresh() {
    const int n = model_->n_s;
    CMatrix lhs =
        CMatrix::Identity(n, n) - r_.loads.asDiagonal() * model_->gamma;
    Eigen::PartialPivLU<CMatrix> lu(lhs);
    const double rcond = lu.rcond();
    if (!(rcond > 1.0 / cond_cap_))
        throw NumericalError(
            "resonant/ill-conditioned configuration in flip evaluator");
    w_ = lu.inverse();
    phi_b_ = r_.loads.asDiagonal() * model_->b;
    x_ = w_ * phi_b_;
    h_ = model_->h0 + model_->a * x_;
    aw_ = model_->a * w_;
    commits_since_refresh_ = 0;
}

FlipEvaluator::FlipUpdate FlipEvaluator::plan_flip(int i) const {
    FlipUpdate up;
    const cxd toggled = model_->alpha + model_->beta - r_.loads(i);
    up.delta = toggled - r_.loads(i);
    up.u = w_.col(i);
    up.v = model_->gamma.row(i) * w_;
    const cxd d = cxd(1.0, 0.0) - up.delta * up.v(i);
    if (std::abs(d) < kDenominatorFloor) {
        up.degenerate = true;
        return up;
    }
    up.c = up.delta / d;
    up.x_row = up.c * (up.v * phi_b_) +
               up.delta * (cxd(1.0, 0.0) + up.c * up.v(i)) * model_->b.row(i);
    return up;
}

CMatrix FlipEvaluator::flipped_h(int i) const {
    if (i < 0 || i >= model_->n_s)
        throw DimensionError("flip index out of range");
    const FlipUpdate up = plan_flip(i);
    if (up.degenerate) {
        LoadVector r = r_;
        r.loads(i) = model_->alpha + model_->beta - r.loads(i);
        fallback_used_ = true;
        return transfer(*model_, r, cond_cap_).h;
    }
    return h_ + aw_.col(i) * up.x_row;
}

void FlipEvaluator::commit(int i) {
    if (i < 0 || i >= model_->n_s)
        throw DimensionError("flip index out of range");
    const FlipUpdate up = plan_flip(i);
    r_.loads(i) = model_->alpha + model_->beta - r_.loads(i);
    ++total_commits_;
    if (up.degenerate) {
        fallback_used_ = true;
        refresh();
        return;
    }
    const CVector au = aw_.col(i);
    h_ += au * up.x_row;
    x_ += up.u * up.x_row;
    w_ += up.c * up.u * up.v;
    aw_ += up.c * au * up.v;
    phi_b_.row(i) += up.delta * model_->b.row(i);
    if (++commits_since_refresh_ >= kRefreshPeriod) refresh();
}

}  // namespace embounds
