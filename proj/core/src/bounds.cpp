#include "embounds/bounds.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <sstream>

#include "embounds/lift.hpp"

namespace embounds {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(BoundKind k) {
    switch (k) {
        case BoundKind::frob_sdr: return "frob_sdr";
        case BoundKind::frob_ni: return "frob_ni";
        case BoundKind::frob_nio: return "frob_nio";
        case BoundKind::fid_sdr: return "fid_sdr";
        case BoundKind::fid_sdr_raw: return "fid_sdr_raw";
        case BoundKind::fid_bisection: return "fid_bisection";
    }
    return "unknown";
}

BoundKind bound_kind_from_string(const std::string& s) {
    for (BoundKind k : {BoundKind::frob_sdr, BoundKind::frob_ni,
                        BoundKind::frob_nio, BoundKind::fid_sdr,
                        BoundKind::fid_sdr_raw, BoundKind::fid_bisection})
        if (to_string(k) == s) return k;
    throw ValidationError("unknown bound kind '" + s + "'");
}

CVector DiagonalGauge::diagonal() const {
    if (log_mag.size() != phase.size())
        throw DimensionError("gauge components must have equal length");
    CVector d(log_mag.size());
    for (Eigen::Index i = 0; i < d.size(); ++i)
        d(i) = std::polar(std::exp(log_mag(i)), phase(i));
    return d;
}

double effective_rank(const CMatrix& psd, double tol) {
    if (psd.rows() != psd.cols())
        throw DimensionError("effective rank needs a square matrix");
    if (psd.rows() == 0)
        throw ValidationError("effective rank of an empty matrix is undefined");
    const CMatrix sym = 0.5 * (psd + psd.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(sym, Eigen::EigenvaluesOnly);
    RVector ev = es.eigenvalues();
    const double top = ev.cwiseAbs().maxCoeff();
    if (ev.minCoeff() < -tol * std::max(1.0, top))
        throw ValidationError("matrix is not positive semidefinite");
    ev = ev.cwiseMax(0.0);
    const double total = ev.sum();
    if (total <= 0.0)
        throw ValidationError("effective rank of the zero matrix is undefined");
    double entropy = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const double p = ev(i) / total;
        if (p > 0.0) entropy -= p * std::log(p);
    }
    return std::exp(entropy);
}

namespace {

// Balancing port rescale fed to apply_gauge before the SDR solves. The bound
// value is gauge-invariant, but the interior-point method is not: a port with
// a tiny receive column against a huge drive row (or vice versa) stretches
// the lifted data's dynamic range until the Newton systems stall. The
// geometric mean sqrt(|A col| / |B row|) restores a balanced normal form, and
// composes so that externally gauged copies of one model solve near-identical
// problems.
CVector equilibration_gauge(const ScenarioModel& m) {
    CVector d = CVector::Ones(m.n_s);
    for (int s = 0; s < m.n_s; ++s) {
        const double out = m.a.col(s).norm();
        const double in = m.b.row(s).norm();
        if (out > 0.0 && in > 0.0)
            d(s) = std::clamp(std::sqrt(out / in), 1e-3, 1e3);
    }
    return d;
}

// Fidelity is scale-invariant in the target, but the ratio solve is not:
// the denominator pin makes sigma track 1/||h_des||^2, so a dim target
// inflates the whole moment block and with it the absolute error that the
// solver's relative tolerances permit. Unit norm keeps sigma near the
// inverse transfer power alone.
TransferMatrix unit_target(const TransferMatrix& h_des) {
    const double n = h_des.h.norm();
    if (n <= 0.0 || !std::isfinite(n)) return h_des;
    return TransferMatrix{h_des.h / n};
}

// Flat per-coordinate scale of the lifted vector under that gauge:
// y'(s + t*n_s) = d_s * y(s + t*n_s).
RVector flat_scale(const CVector& d, int n_t) {
    const int n_s = static_cast<int>(d.size());
    RVector f(n_s * n_t);
    for (int t = 0; t < n_t; ++t)
        for (int s = 0; s < n_s; ++s) f(t * n_s + s) = d(s).real();
    return f;
}

// Shared epilogue for the relaxation bounds: pull the complex blocks out of
// the real solution, map them back to the caller's coordinates, and attach
// diagnostics.
void attach_blocks(BoundResult& res, const SdpSolution& sol,
                   const LiftedProblem& lp, const RVector& unscale) {
    try {
        ComplexBlocks blocks = extract_blocks(sol, lp);
        res.sigma = blocks.sigma;
        for (Eigen::Index k = 0; k < unscale.size(); ++k) {
            blocks.y_vec(k) /= unscale(k);
            for (Eigen::Index l = 0; l < unscale.size(); ++l)
                blocks.y_mat(k, l) /= unscale(k) * unscale(l);
        }
        try {
            res.eff_rank = effective_rank(blocks.y_mat);
        } catch (const ValidationError&) {
            // degenerate moment block; leave the field unset
        }
        res.blocks = std::move(blocks);
    } catch (const Error& e) {
        res.valid = false;
        if (!res.note.empty()) res.note += "; ";
        res.note += e.what();
    }
}

}  // namespace

BoundResult frob_sdr_bound(const ScenarioModel& model,
                           const SdpOptions& solver, const LiftOptions& lift) {
    model.validate();
    BoundResult res;
    res.kind = BoundKind::frob_sdr;

    const CVector d = equilibration_gauge(model);
    const LiftedProblem lp =
        assemble_frobenius_sdp(apply_gauge(model, d), lift);
    const RealSdpData data = embed_real(lp);
    const SdpSolution sol = solve(data, solver);
    res.solver_status = sol.status;
    res.iterations = sol.iterations;
    res.value = sol.objective;
    res.valid = sol.status == SolverStatus::optimal;
    if (!res.valid)
        res.note = "solver: " + to_string(sol.status) +
                   (sol.message.empty() ? "" : " (" + sol.message + ")");
    attach_blocks(res, sol, lp, flat_scale(d, model.n_t));
    if (res.sigma && std::abs(*res.sigma - 1.0) > 1e-5) {
        res.valid = false;
        if (!res.note.empty()) res.note += "; ";
        std::ostringstream os;
        os << "corner drifted from its pinned value (" << *res.sigma << ")";
        res.note += os.str();
    }
    return res;
}

BoundResult frob_ni_bound(const ScenarioModel& model) {
    model.validate();
    BoundResult res;
    res.kind = BoundKind::frob_ni;
    const double gamma = std::max(std::abs(model.alpha), std::abs(model.beta));
    const double gnorm = spectral_norm(model.gamma);
    const double margin = 1.0 - gamma * gnorm;
    if (margin <= 0.0) {
        res.value = kInf;
        res.valid = false;
        std::ostringstream os;
        os << "norm bound undefined: load magnitude " << gamma
           << " times coupling norm " << gnorm << " reaches 1";
        res.note = os.str();
        return res;
    }
    const double reach = spectral_norm(model.a) * gamma *
                         std::sqrt(model.b.squaredNorm()) / margin;
    const double base = std::sqrt(model.h0.squaredNorm());
    res.value = (base + reach) * (base + reach);
    res.valid = true;
    return res;
}

BoundResult frob_nio_bound(const ScenarioModel& model, const NioOptions& opts) {
    model.validate();
    BoundResult res;
    res.kind = BoundKind::frob_nio;

    const BoundResult identity = frob_ni_bound(model);
    if (!identity.valid) {
        res.value = identity.value;
        res.valid = false;
        res.note = "gauge search skipped: " + identity.note;
        return res;
    }

    const int n = model.n_s;
    auto objective = [&](const RVector& x) -> double {
        DiagonalGauge g{x.head(n), x.tail(n)};
        ScenarioModel gm = apply_gauge(model, g.diagonal());
        const BoundResult r = frob_ni_bound(gm);
        return r.valid ? r.value : kInf;
    };

    RVector x = RVector::Zero(2 * n);
    double f = identity.value;
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        RVector grad(2 * n);
        for (int i = 0; i < 2 * n; ++i) {
            RVector xp = x, xm = x;
            xp(i) += opts.fd_step;
            xm(i) -= opts.fd_step;
            double fp = objective(xp), fm = objective(xm);
            // an invalid neighbor just means "steeply uphill"
            const double wall = 10.0 * f + 1e6;
            if (!std::isfinite(fp)) fp = wall;
            if (!std::isfinite(fm)) fm = wall;
            grad(i) = (fp - fm) / (2.0 * opts.fd_step);
        }
        const double gnorm2 = grad.squaredNorm();
        if (gnorm2 <= 0.0) break;

        double t = 1.0;
        double f_new = kInf;
        RVector x_new;
        bool moved = false;
        for (int back = 0; back < 40; ++back, t *= 0.5) {
            x_new = x - t * grad;
            f_new = objective(x_new);
            if (std::isfinite(f_new) && f_new <= f - 1e-4 * t * gnorm2) {
                moved = true;
                break;
            }
        }
        if (!moved) break;
        const double drop = f - f_new;
        x = x_new;
        f = f_new;
        if (drop <= opts.rel_tol * std::max(1.0, std::abs(f))) break;
    }

    res.iterations = iter;
    if (f <= identity.value) {
        res.value = f;
        res.gauge = DiagonalGauge{x.head(n), x.tail(n)};
    } else {
        res.value = identity.value;
        res.gauge = DiagonalGauge{RVector::Zero(n), RVector::Zero(n)};
    }
    res.valid = true;
    return res;
}

BoundResult fid_sdr_bound(const ScenarioModel& model,
                          const TransferMatrix& h_des,
                          const SdpOptions& solver, const LiftOptions& lift) {
    model.validate();
    BoundResult res;
    res.kind = BoundKind::fid_sdr;

    const CVector d = equilibration_gauge(model);
    const LiftedProblem lp =
        assemble_cc_sdp(apply_gauge(model, d), unit_target(h_des), lift);
    const RealSdpData data = embed_real(lp);
    const SdpSolution sol = solve(data, solver);
    res.solver_status = sol.status;
    res.iterations = sol.iterations;
    res.raw_value = sol.objective;
    res.value = std::clamp(sol.objective, 0.0, 1.0);
    res.valid = sol.status == SolverStatus::optimal;
    if (!res.valid)
        res.note = "solver: " + to_string(sol.status) +
                   (sol.message.empty() ? "" : " (" + sol.message + ")");
    attach_blocks(res, sol, lp, flat_scale(d, model.n_t));
    if (res.sigma && *res.sigma > 1e12 * lp.sigma_min) {
        res.valid = false;
        if (!res.note.empty()) res.note += "; ";
        res.note +=
            "normalization mass collapsed toward zero; the ratio relaxation "
            "diverges on this instance";
    }
    return res;
}

BoundResult fid_bisection_bound(const ScenarioModel& model,
                                const TransferMatrix& h_des,
                                const SdpOptions& solver,
                                const BisectionOptions& opts,
                                const LiftOptions& lift) {
    model.validate();
    BoundResult res;
    res.kind = BoundKind::fid_bisection;

    const ScenarioModel eq = apply_gauge(model, equilibration_gauge(model));
    auto [num, den] = build_fidelity_forms(eq, unit_target(h_des));
    LiftedProblem lp;
    lp.dim = eq.n_s * eq.n_t;
    lp.kind = LiftKind::frobenius;
    lp.objective = num;
    lp.eq_constraints = build_binary_constraints(eq);
    if (lift.repetition) {
        auto rep = build_repetition_constraints(eq);
        lp.eq_constraints.insert(lp.eq_constraints.end(),
                                 std::make_move_iterator(rep.begin()),
                                 std::make_move_iterator(rep.end()));
    }
    RealSdpData data = embed_real(lp);

    int solves = 0;
    bool clean = true;
    std::string first_issue;
    auto attainable = [&](double level) {
        QuadraticForm combo;
        combo.r_mat = num.r_mat - level * den.r_mat;
        combo.p = num.p - level * den.p;
        combo.q = num.q - level * den.q;
        combo.tau = num.tau - level * den.tau;
        data.cost = embed_hermitian_half(combo.bordered(), data.dim);
        const SdpSolution sol = solve(data, solver);
        ++solves;
        if (sol.status != SolverStatus::optimal) {
            clean = false;
            if (first_issue.empty()) {
                std::ostringstream os;
                os << "solver " << to_string(sol.status) << " at level "
                   << level;
                first_issue = os.str();
            }
            // treat as attainable so the returned level only moves up
            return true;
        }
        return sol.objective >= -1e-6 * (1.0 + std::abs(sol.objective));
    };

    double lo = 0.0, hi = 1.0;
    if (attainable(1.0)) {
        res.value = 1.0;
    } else {
        for (int i = 0; i < opts.max_iterations && hi - lo > opts.tol; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (attainable(mid))
                lo = mid;
            else
                hi = mid;
        }
        res.value = hi;
    }
    res.iterations = solves;
    res.valid = clean;
    if (!clean) res.note = first_issue;
    return res;
}

}  // namespace embounds
