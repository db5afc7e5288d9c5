#include "embounds/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

namespace embounds {

namespace {

// Solves (I - diag(r_sub) * g) * x = rhs with a condition estimate guard.
CMatrix resolvent_solve(const CMatrix& g, const CVector& r, const CMatrix& rhs,
                        double cond_cap) {
    const Eigen::Index n = g.rows();
    CMatrix lhs = CMatrix::Identity(n, n) - r.asDiagonal() * g;
    Eigen::PartialPivLU<CMatrix> lu(lhs);
    const double rcond = lu.rcond();
    if (!(rcond > 1.0 / cond_cap)) {
        std::ostringstream os;
        os << "resonant/ill-conditioned configuration: resolvent condition "
              "estimate "
           << (rcond > 0 ? 1.0 / rcond : std::numeric_limits<double>::infinity())
           << " exceeds cap " << cond_cap;
        throw NumericalError(os.str());
    }
    return lu.solve(rhs);
}

}  // namespace

std::string ControlVector::to_string() const {
    std::string s;
    s.reserve(bits.size());
    for (int b : bits) s.push_back(b ? '1' : '0');
    return s;
}

ControlVector ControlVector::zeros(int n) {
    ControlVector v;
    v.bits.assign(static_cast<std::size_t>(n), 0);
    return v;
}

ControlVector ControlVector::from_string(const std::string& s) {
    ControlVector v;
    v.bits.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1')
            throw ValidationError("control string must contain only 0/1");
        v.bits.push_back(c == '1' ? 1 : 0);
    }
    return v;
}

CMatrix ScenarioModel::assembled_scattering() const {
    CMatrix s(n_r + n_s, n_t + n_s);
    s.topLeftCorner(n_r, n_t) = h0;
    s.topRightCorner(n_r, n_s) = a;
    s.bottomLeftCorner(n_s, n_t) = b;
    s.bottomRightCorner(n_s, n_s) = gamma;
    return s;
}

void ScenarioModel::validate() const {
    if (n_t < 1 || n_r < 1 || n_s < 0)
        throw DimensionError("port counts must satisfy n_t>=1, n_r>=1, n_s>=0");
    auto check = [](const CMatrix& m, int rows, int cols, const char* name) {
        if (m.rows() != rows || m.cols() != cols) {
            std::ostringstream os;
            os << "block '" << name << "' has shape " << m.rows() << "x"
               << m.cols() << ", expected " << rows << "x" << cols;
            throw DimensionError(os.str());
        }
    };
    check(h0, n_r, n_t, "h0");
    check(a, n_r, n_s, "a");
    check(gamma, n_s, n_s, "gamma");
    check(b, n_s, n_t, "b");
    if (alpha == beta)
        throw ValidationError("alpha and beta must be distinct loads");
    if (passive) {
        const double tol = 1.0 + 1e-9;
        if (std::abs(alpha) > tol || std::abs(beta) > tol)
            throw ValidationError(
                "passive model requires |alpha| <= 1 and |beta| <= 1");
        const double norm = spectral_norm(assembled_scattering());
        if (norm > tol) {
            std::ostringstream os;
            os << "passive model has scattering norm " << norm << " > 1";
            throw ValidationError(os.str());
        }
    }
}

LoadVector encode(const ControlVector& v, const ScenarioModel& model) {
    if (v.size() != model.n_s)
        throw DimensionError("control vector length does not match n_s");
    LoadVector r;
    r.loads.resize(model.n_s);
    for (int i = 0; i < model.n_s; ++i) {
        if (v.bits[i] != 0 && v.bits[i] != 1)
            throw ValidationError("control bits must be 0 or 1");
        // Selecting directly keeps the loads bit-exact; the affine form
        // alpha + (beta - alpha) * bit can be off by an ulp at bit = 1.
        r.loads(i) = v.bits[i] ? model.beta : model.alpha;
    }
    return r;
}

CMatrix element_response(const ScenarioModel& model, const LoadVector& r,
                         double cond_cap) {
    if (r.size() != model.n_s)
        throw DimensionError("load vector length does not match n_s");
    if (model.n_s == 0) return CMatrix::Zero(0, model.n_t);
    const CMatrix phi_b = r.loads.asDiagonal() * model.b;
    return resolvent_solve(model.gamma, r.loads, phi_b, cond_cap);
}

TransferMatrix transfer(const ScenarioModel& model, const LoadVector& r,
                        double cond_cap) {
    TransferMatrix out;
    if (model.n_s == 0) {
        out.h = model.h0;
        return out;
    }
    out.h = model.h0 + model.a * element_response(model, r, cond_cap);
    return out;
}

ScenarioModel reduce_fixed(const ScenarioModel& model,
                           const std::vector<int>& used) {
    for (std::size_t k = 0; k < used.size(); ++k) {
        if (used[k] < 0 || used[k] >= model.n_s)
            throw DimensionError("used index out of range");
        if (k > 0 && used[k] <= used[k - 1])
            throw ValidationError("used indices must be strictly increasing");
    }
    const int n1 = static_cast<int>(used.size());
    if (n1 == model.n_s) return model;

    std::vector<int> fixed;
    {
        std::vector<char> is_used(static_cast<std::size_t>(model.n_s), 0);
        for (int i : used) is_used[static_cast<std::size_t>(i)] = 1;
        for (int i = 0; i < model.n_s; ++i)
            if (!is_used[static_cast<std::size_t>(i)]) fixed.push_back(i);
    }
    const int n2 = static_cast<int>(fixed.size());

    auto take = [](const CMatrix& m, const std::vector<int>* rows,
                   const std::vector<int>* cols) {
        const Eigen::Index nr = rows ? static_cast<Eigen::Index>(rows->size())
                                     : m.rows();
        const Eigen::Index nc = cols ? static_cast<Eigen::Index>(cols->size())
                                     : m.cols();
        CMatrix out(nr, nc);
        for (Eigen::Index i = 0; i < nr; ++i)
            for (Eigen::Index j = 0; j < nc; ++j)
                out(i, j) = m(rows ? (*rows)[static_cast<std::size_t>(i)] : i,
                              cols ? (*cols)[static_cast<std::size_t>(j)] : j);
        return out;
    };

    const CMatrix g11 = take(model.gamma, &used, &used);
    const CMatrix g12 = take(model.gamma, &used, &fixed);
    const CMatrix g21 = take(model.gamma, &fixed, &used);
    const CMatrix g22 = take(model.gamma, &fixed, &fixed);
    const CMatrix a1 = take(model.a, nullptr, &used);
    const CMatrix a2 = take(model.a, nullptr, &fixed);
    const CMatrix b1 = take(model.b, &used, nullptr);
    const CMatrix b2 = take(model.b, &fixed, nullptr);

    // Fixed elements sit at the alpha load; eliminate them through the inner
    // resolvent (I - alpha*Gamma_22)^-1.
    const CVector r2 = CVector::Constant(n2, model.alpha);
    const CMatrix inner_g21 = resolvent_solve(g22, r2, g21, 1e12);
    const CMatrix inner_b2 = resolvent_solve(g22, r2, b2, 1e12);

    ScenarioModel out = model;
    out.n_s = n1;
    out.gamma = g11 + model.alpha * g12 * inner_g21;
    out.b = b1 + model.alpha * g12 * inner_b2;
    out.a = a1 + model.alpha * a2 * inner_g21;
    out.h0 = model.h0 + model.alpha * a2 * inner_b2;
    return out;
}

double frobenius_sq(const TransferMatrix& h) { return h.h.squaredNorm(); }

double fidelity(const TransferMatrix& h, const TransferMatrix& h_des) {
    const double den = h.h.squaredNorm() * h_des.h.squaredNorm();
    if (den <= 0.0)
        throw ValidationError("fidelity undefined for a zero matrix");
    const double num = std::norm(frobenius_inner(h_des.h, h.h));
    return std::clamp(num / den, 0.0, 1.0);
}

ScenarioModel apply_gauge(const ScenarioModel& model, const CVector& d) {
    if (d.size() != model.n_s)
        throw DimensionError("gauge vector length does not match n_s");
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (std::abs(d(i)) < 1e-300)
            throw ValidationError("gauge entries must be nonzero");
    ScenarioModel out = model;
    const CVector dinv = d.cwiseInverse();
    out.a = model.a * dinv.asDiagonal();
    out.b = d.asDiagonal() * model.b;
    out.gamma = d.asDiagonal() * model.gamma * dinv.asDiagonal();
    // A diagonal similarity changes the block norms, so any passivity tag on
    // the input no longer certifies anything.
    out.passive = false;
    return out;
}

}  // namespace embounds
