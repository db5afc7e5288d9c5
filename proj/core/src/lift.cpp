#include "embounds/lift.hpp"

#include <sstream>

#include "embounds/rng.hpp"

namespace embounds {

namespace {

// y = vec(X) is column-stacked, so (s, t) lives at flat index t*n_s + s.
int flat_index(int s, int t, int n_s) { return t * n_s + s; }

// e_st: unit selector for X_st.
CVector selector_e(int s, int t, int n_s, int n_t) {
    CVector e = CVector::Zero(n_s * n_t);
    e(flat_index(s, t, n_s)) = 1.0;
    return e;
}

// f_st: selects (Gamma X)_st, i.e. block t carries row s of Gamma.
CVector selector_f(const ScenarioModel& model, int s, int t) {
    CVector f = CVector::Zero(model.n_s * model.n_t);
    for (int j = 0; j < model.n_s; ++j)
        f(flat_index(j, t, model.n_s)) = model.gamma(s, j);
    return f;
}

QuadraticForm branch_product_form(const CVector& u, const CVector& w, cxd bu,
                                  cxd bw, cxd mu, cxd nu) {
    // ((u^T y) - mu*bu)^* ((w^T y) - nu*bw) expanded in y.
    QuadraticForm f;
    f.r_mat = u.conjugate() * w.transpose();
    f.p = -nu * bw * u.conjugate();
    f.q = -mu * bu * w.conjugate();
    f.tau = std::conj(mu) * nu * std::conj(bu) * bw;
    return f;
}

}  // namespace

CVector feasible_lift(const ScenarioModel& model, const LoadVector& r) {
    const CMatrix x = element_response(model, r);
    return Eigen::Map<const CVector>(x.data(), x.size());
}

QuadraticForm build_frobenius_objective(const ScenarioModel& model) {
    model.validate();
    const int n_s = model.n_s, n_t = model.n_t;
    const CMatrix aha = model.a.adjoint() * model.a;
    QuadraticForm f;
    f.r_mat = CMatrix::Zero(n_s * n_t, n_s * n_t);
    for (int t = 0; t < n_t; ++t)
        f.r_mat.block(t * n_s, t * n_s, n_s, n_s) = aha;
    const CMatrix ah0 = model.a.adjoint() * model.h0;
    f.p = Eigen::Map<const CVector>(ah0.data(), ah0.size());
    f.q = f.p;
    f.tau = model.h0.squaredNorm();
    return f;
}

std::vector<QuadraticForm> build_binary_constraints(const ScenarioModel& model) {
    model.validate();
    std::vector<QuadraticForm> out;
    out.reserve(static_cast<std::size_t>(model.n_s) * model.n_t);
    for (int s = 0; s < model.n_s; ++s) {
        for (int t = 0; t < model.n_t; ++t) {
            const CVector e = selector_e(s, t, model.n_s, model.n_t);
            const CVector f = selector_f(model, s, t);
            const CVector u = e - model.alpha * f;
            const CVector w = e - model.beta * f;
            out.push_back(branch_product_form(u, w, model.b(s, t),
                                              model.b(s, t), model.alpha,
                                              model.beta));
        }
    }
    return out;
}

std::vector<QuadraticForm> build_repetition_constraints(
    const ScenarioModel& model, int t0) {
    model.validate();
    if (model.n_t == 1) return {};
    if (t0 < 0 || t0 >= model.n_t)
        throw DimensionError("anchor column out of range");
    std::vector<QuadraticForm> out;
    out.reserve(2u * model.n_s * (model.n_t - 1));
    const std::pair<cxd, cxd> branches[2] = {{model.alpha, model.beta},
                                             {model.beta, model.alpha}};
    for (int s = 0; s < model.n_s; ++s) {
        const CVector e0 = selector_e(s, t0, model.n_s, model.n_t);
        const CVector f0 = selector_f(model, s, t0);
        for (int t = 0; t < model.n_t; ++t) {
            if (t == t0) continue;
            const CVector e = selector_e(s, t, model.n_s, model.n_t);
            const CVector f = selector_f(model, s, t);
            for (const auto& [mu, nu] : branches) {
                // Rules out loading branch mu-complement at t together with
                // nu-complement at t0; the surviving assignments agree.
                out.push_back(branch_product_form(e - mu * f, e0 - nu * f0,
                                                  model.b(s, t),
                                                  model.b(s, t0), mu, nu));
            }
        }
    }
    return out;
}

std::pair<QuadraticForm, QuadraticForm> build_fidelity_forms(
    const ScenarioModel& model, const TransferMatrix& h_des) {
    model.validate();
    if (h_des.h.rows() != model.n_r || h_des.h.cols() != model.n_t)
        throw DimensionError("target matrix must be n_r x n_t");
    if (h_des.h.norm() <= 0.0)
        throw ValidationError("target matrix must be nonzero");

    const CMatrix ahd = model.a.adjoint() * h_des.h;
    const CVector q_des = Eigen::Map<const CVector>(ahd.data(), ahd.size());
    const cxd c0 = frobenius_inner(h_des.h, model.h0);

    QuadraticForm num;
    num.r_mat = q_des * q_des.adjoint();
    num.p = c0 * q_des;
    num.q = num.p;
    num.tau = std::norm(c0);

    const double h2 = h_des.h.squaredNorm();
    QuadraticForm den = build_frobenius_objective(model);
    den.r_mat *= h2;
    den.p *= h2;
    den.q = den.p;
    den.tau *= h2;
    return {std::move(num), std::move(den)};
}

LiftedProblem assemble_frobenius_sdp(const ScenarioModel& model,
                                     const LiftOptions& opts) {
    LiftedProblem lp;
    lp.dim = model.n_s * model.n_t;
    lp.kind = LiftKind::frobenius;
    lp.objective = build_frobenius_objective(model);
    lp.eq_constraints = build_binary_constraints(model);
    if (opts.repetition) {
        auto rep = build_repetition_constraints(model);
        lp.eq_constraints.insert(lp.eq_constraints.end(),
                                 std::make_move_iterator(rep.begin()),
                                 std::make_move_iterator(rep.end()));
    }
    return lp;
}

LiftedProblem assemble_cc_sdp(const ScenarioModel& model,
                              const TransferMatrix& h_des,
                              const LiftOptions& opts) {
    LiftedProblem lp;
    lp.dim = model.n_s * model.n_t;
    lp.kind = LiftKind::charnes_cooper;
    auto [num, den] = build_fidelity_forms(model, h_des);
    lp.objective = std::move(num);
    lp.normalization = std::move(den);
    lp.eq_constraints = build_binary_constraints(model);
    if (opts.repetition) {
        auto rep = build_repetition_constraints(model);
        lp.eq_constraints.insert(lp.eq_constraints.end(),
                                 std::make_move_iterator(rep.begin()),
                                 std::make_move_iterator(rep.end()));
    }

    // Corner floor: nine orders below the inverse of the largest denominator
    // seen across random feasible configurations.
    Rng rng(0x5eedc0de);
    double max_den = 0.0;
    for (int k = 0; k < 100; ++k) {
        ControlVector v = ControlVector::zeros(model.n_s);
        for (int i = 0; i < model.n_s; ++i)
            v.bits[static_cast<std::size_t>(i)] =
                static_cast<int>(rng.integer(2));
        try {
            const CVector y = feasible_lift(model, encode(v, model));
            const cxd d = lp.normalization->value(y);
            max_den = std::max(max_den, d.real());
        } catch (const NumericalError&) {
            // resonant configuration: skip the sample
        }
    }
    if (max_den <= 0.0)
        throw NumericalError(
            "all sampled fidelity denominators vanish; ratio undefined");
    lp.sigma_min = 1e-9 / max_den;
    return lp;
}

namespace {

// [[Re K, -Im K], [Im K, Re K]] / 2, padded to m_r; symmetric when K is
// Hermitian. The 1/2 keeps real traces equal to complex ones.
RMatrix embed_half(const CMatrix& k, int m_r) {
    const int mc = static_cast<int>(k.rows());
    RMatrix a = RMatrix::Zero(m_r, m_r);
    a.block(0, 0, mc, mc) = 0.5 * k.real();
    a.block(0, mc, mc, mc) = -0.5 * k.imag();
    a.block(mc, 0, mc, mc) = 0.5 * k.imag();
    a.block(mc, mc, mc, mc) = 0.5 * k.real();
    return a;
}

}  // namespace

RMatrix embed_hermitian_half(const CMatrix& k, int real_dim) {
    if (real_dim < 2 * k.rows())
        throw DimensionError("real dimension too small for the doubled block");
    return embed_half(k, real_dim);
}

RealSdpData embed_real(const LiftedProblem& lp) {
    const int n = lp.dim;
    const int mc = n + 1;
    const bool cc = lp.kind == LiftKind::charnes_cooper;
    const int mr = 2 * mc + (cc ? 1 : 0);

    const CMatrix k_obj = lp.objective.bordered();
    if ((k_obj - k_obj.adjoint()).cwiseAbs().maxCoeff() >
        1e-12 * (1.0 + k_obj.cwiseAbs().maxCoeff()))
        throw ValidationError("objective form must be Hermitian");

    RealSdpData data;
    data.dim = mr;
    data.complex_dim = mc;
    data.has_slack = cc;
    data.cost = embed_half(k_obj, mr);

    std::vector<RMatrix> rows;
    std::vector<double> rhs;
    auto push = [&](RMatrix a, double b) {
        rows.push_back(std::move(a));
        rhs.push_back(b);
    };

    for (const auto& qf : lp.eq_constraints) {
        const CMatrix k = qf.bordered();
        const double scale = 1.0 + k.cwiseAbs().maxCoeff();
        const CMatrix kh = 0.5 * (k + k.adjoint());
        const CMatrix ki = (k - k.adjoint()) / cxd(0.0, 2.0);
        if (kh.cwiseAbs().maxCoeff() > 1e-14 * scale)
            push(embed_half(kh, mr), 0.0);
        if (ki.cwiseAbs().maxCoeff() > 1e-14 * scale)
            push(embed_half(ki, mr), 0.0);
    }

    if (cc) {
        const CMatrix k_norm = lp.normalization->bordered();
        if ((k_norm - k_norm.adjoint()).cwiseAbs().maxCoeff() >
            1e-12 * (1.0 + k_norm.cwiseAbs().maxCoeff()))
            throw ValidationError("normalization form must be Hermitian");
        push(embed_half(k_norm, mr), 1.0);

        // corner - slack = sigma_min, with the slack a PSD diagonal entry.
        RMatrix a = RMatrix::Zero(mr, mr);
        a(n, n) = 0.5;
        a(mc + n, mc + n) = 0.5;
        a(2 * mc, 2 * mc) = -1.0;
        push(std::move(a), lp.sigma_min);
    } else {
        CMatrix pin = CMatrix::Zero(mc, mc);
        pin(n, n) = 1.0;
        push(embed_half(pin, mr), 1.0);
    }

    // Symmetry coupling: pins the redundant gauge of the doubled embedding,
    // M11 == M22 and M12 antisymmetric.
    for (int i = 0; i < mc; ++i) {
        for (int j = i; j < mc; ++j) {
            RMatrix d = RMatrix::Zero(mr, mr);
            if (i == j) {
                d(i, i) = 1.0;
                d(mc + i, mc + i) = -1.0;
            } else {
                d(i, j) = d(j, i) = 0.5;
                d(mc + i, mc + j) = d(mc + j, mc + i) = -0.5;
            }
            push(std::move(d), 0.0);

            RMatrix q = RMatrix::Zero(mr, mr);
            q(i, mc + j) = q(mc + j, i) = 0.5;
            if (i != j) q(j, mc + i) = q(mc + i, j) = 0.5;
            push(std::move(q), 0.0);
        }
    }

    data.constraints = std::move(rows);
    data.rhs = Eigen::Map<const RVector>(rhs.data(),
                                         static_cast<Eigen::Index>(rhs.size()));
    data.validate();
    return data;
}

}  // namespace embounds
