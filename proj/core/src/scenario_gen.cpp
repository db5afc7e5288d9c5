#include "embounds/scenario_gen.hpp"

#include <cmath>
#include <sstream>

#include "embounds/rng.hpp"

namespace embounds {

const char* to_string(ScenarioFamily f) {
    switch (f) {
        case ScenarioFamily::rich_scattering_like:
            return "rich-scattering-like";
        case ScenarioFamily::free_space_like:
            return "free-space-like";
    }
    return "?";
}

ScenarioFamily scenario_family_from_string(const std::string& s) {
    if (s == "rich-scattering-like") return ScenarioFamily::rich_scattering_like;
    if (s == "free-space-like") return ScenarioFamily::free_space_like;
    throw ValidationError("unknown scenario family '" + s + "'");
}

void ScenarioSpec::validate() const {
    if (n_t < 1) throw ValidationError("field 'n_t': must be >= 1");
    if (n_r < 1) throw ValidationError("field 'n_r': must be >= 1");
    if (n_s < 1) throw ValidationError("field 'n_s': must be >= 1");
    if (!(loss_factor > 0.0) || loss_factor > 1.0)
        throw ValidationError("field 'loss_factor': must be in (0, 1]");
    if (coupling_strength < 0.0 || coupling_strength >= loss_factor)
        throw ValidationError(
            "field 'coupling_strength': must be in [0, loss_factor)");
    if (std::abs(alpha) > 1.0 + 1e-12 || std::abs(beta) > 1.0 + 1e-12)
        throw ValidationError("fields 'alpha'/'beta': magnitude must be <= 1");
    if (alpha == beta)
        throw ValidationError("fields 'alpha'/'beta': loads must differ");
}

namespace {

struct BlockLayout {
    int n_t, n_r, n_s;
    int s0() const { return n_t + n_r; }  // first tunable-port index
    int total() const { return n_t + n_r + n_s; }
};

double gamma_norm(const CMatrix& s, const BlockLayout& l) {
    return spectral_norm(CMatrix(s.block(l.s0(), l.s0(), l.n_s, l.n_s)));
}

void scale_gamma_block(CMatrix& s, const BlockLayout& l, double factor) {
    s.block(l.s0(), l.s0(), l.n_s, l.n_s) *= factor;
}

// The blocks the model keeps: receive/tunable rows of the transmit/tunable
// columns. The self blocks of the transmit and receive ports are discarded,
// so norm targets apply to this assembly, not to the full port matrix.
CMatrix retained(const CMatrix& s, const BlockLayout& l) {
    CMatrix r(l.n_r + l.n_s, l.n_t + l.n_s);
    r.topLeftCorner(l.n_r, l.n_t) = s.block(l.n_t, 0, l.n_r, l.n_t);
    r.topRightCorner(l.n_r, l.n_s) = s.block(l.n_t, l.s0(), l.n_r, l.n_s);
    r.bottomLeftCorner(l.n_s, l.n_t) = s.block(l.s0(), 0, l.n_s, l.n_t);
    r.bottomRightCorner(l.n_s, l.n_s) = s.block(l.s0(), l.s0(), l.n_s, l.n_s);
    return r;
}

double retained_norm(const CMatrix& s, const BlockLayout& l) {
    return spectral_norm(retained(s, l));
}

// Scales everything except the coupling block so that the retained norm
// lands on `target`. Monotone enough for bisection: at c=0 the norm is the
// coupling block's alone, and it grows without bound with c.
void rescale_free_part(CMatrix& s, const BlockLayout& l, double target) {
    CMatrix gamma_only = CMatrix::Zero(s.rows(), s.cols());
    gamma_only.block(l.s0(), l.s0(), l.n_s, l.n_s) =
        s.block(l.s0(), l.s0(), l.n_s, l.n_s);
    const CMatrix rest = s - gamma_only;
    if (rest.norm() < 1e-300) return;

    double lo = 0.0, hi = 1.0;
    while (retained_norm(CMatrix(gamma_only + hi * rest), l) < target &&
           hi < 1e6)
        hi *= 2.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (retained_norm(CMatrix(gamma_only + mid * rest), l) < target)
            lo = mid;
        else
            hi = mid;
    }
    s = gamma_only + 0.5 * (lo + hi) * rest;
}

}  // namespace

ScenarioModel generate(const ScenarioSpec& spec) {
    spec.validate();
    const BlockLayout l{spec.n_t, spec.n_r, spec.n_s};
    const int n = l.total();

    Rng rng(spec.seed);
    CMatrix g = rng.cnormal_matrix(n, n);
    CMatrix s = 0.5 * (g + g.transpose());  // reciprocity: S = S^T

    s *= spec.loss_factor / retained_norm(s, l);

    if (spec.family == ScenarioFamily::free_space_like) {
        // Weakly interacting elements: keep self terms, damp cross terms.
        for (int i = 0; i < l.n_s; ++i)
            for (int j = 0; j < l.n_s; ++j)
                if (i != j) s(l.s0() + i, l.s0() + j) *= 0.1;
    }

    const double rel_tol = 1e-6;
    if (spec.coupling_strength == 0.0) {
        s.block(l.s0(), l.s0(), l.n_s, l.n_s).setZero();
        const double norm = retained_norm(s, l);
        if (norm < 1e-300)
            throw NumericalError("degenerate draw: scattering matrix is zero");
        s *= spec.loss_factor / norm;
    } else {
        bool converged = false;
        for (int round = 0; round < 50 && !converged; ++round) {
            const double gn = gamma_norm(s, l);
            if (gn < 1e-300)
                throw NumericalError("degenerate draw: coupling block is zero");
            scale_gamma_block(s, l, spec.coupling_strength / gn);

            const double norm = retained_norm(s, l);
            if (norm > spec.loss_factor * (1.0 + rel_tol)) {
                s *= spec.loss_factor / norm;
            } else if (norm < 0.95 * spec.loss_factor) {
                rescale_free_part(s, l, spec.loss_factor * (1.0 - 1e-9));
            } else {
                converged = true;
            }
        }
        const double gn = gamma_norm(s, l);
        const double norm = retained_norm(s, l);
        if (std::abs(gn - spec.coupling_strength) >
            0.05 * spec.coupling_strength) {
            std::ostringstream os;
            os << "projection failed to meet coupling target: ||Gamma|| = "
               << gn << ", target " << spec.coupling_strength;
            throw NumericalError(os.str());
        }
        if (norm > spec.loss_factor * 1.05 || norm < 0.95 * spec.loss_factor) {
            std::ostringstream os;
            os << "projection failed to meet loss target: ||S|| = " << norm
               << ", target " << spec.loss_factor;
            throw NumericalError(os.str());
        }
    }

    ScenarioModel model;
    model.n_t = spec.n_t;
    model.n_r = spec.n_r;
    model.n_s = spec.n_s;
    // Port order: transmit, receive, tunable.
    model.h0 = s.block(l.n_t, 0, l.n_r, l.n_t);
    model.a = s.block(l.n_t, l.s0(), l.n_r, l.n_s);
    model.b = s.block(l.s0(), 0, l.n_s, l.n_t);
    model.gamma = s.block(l.s0(), l.s0(), l.n_s, l.n_s);
    model.alpha = spec.alpha;
    model.beta = spec.beta;
    model.passive = true;
    model.seed = spec.seed;
    {
        std::ostringstream os;
        os << to_string(spec.family) << " coupling=" << spec.coupling_strength
           << " loss=" << spec.loss_factor;
        model.tag = os.str();
    }
    model.validate();
    return model;
}

const char* to_string(TargetKind k) {
    switch (k) {
        case TargetKind::identity:
            return "identity";
        case TargetKind::cyclic_permutation:
            return "cyclic-permutation";
        case TargetKind::dft:
            return "dft";
        case TargetKind::random:
            return "random";
    }
    return "?";
}

TargetKind target_kind_from_string(const std::string& s) {
    if (s == "identity") return TargetKind::identity;
    if (s == "cyclic-permutation") return TargetKind::cyclic_permutation;
    if (s == "dft") return TargetKind::dft;
    if (s == "random") return TargetKind::random;
    throw ValidationError("unknown target kind '" + s + "'");
}

TransferMatrix target_operator(TargetKind kind, int n, std::uint64_t seed) {
    if (n < 1) throw DimensionError("target size must be >= 1");
    TransferMatrix t;
    switch (kind) {
        case TargetKind::identity:
            t.h = CMatrix::Identity(n, n);
            break;
        case TargetKind::cyclic_permutation: {
            t.h = CMatrix::Zero(n, n);
            for (int j = 0; j < n; ++j) t.h((j + 1) % n, j) = 1.0;
            break;
        }
        case TargetKind::dft: {
            t.h.resize(n, n);
            const double w = -2.0 * M_PI / static_cast<double>(n);
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    t.h(j, k) = std::polar(1.0 / std::sqrt(double(n)),
                                           w * double(j) * double(k));
            break;
        }
        case TargetKind::random: {
            Rng rng(seed);
            t.h = rng.cnormal_matrix(n, n);
            break;
        }
    }
    t.h /= t.h.norm();
    return t;
}

}  // namespace embounds
