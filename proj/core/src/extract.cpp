#include "embounds/sdp.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>

namespace embounds {

ComplexBlocks extract_blocks(const SdpSolution& sol, const LiftedProblem& lp) {
    const int n = lp.dim;
    const int mc = n + 1;
    const bool cc = lp.kind == LiftKind::charnes_cooper;
    const int expect = 2 * mc + (cc ? 1 : 0);
    if (sol.m_opt.rows() != expect || sol.m_opt.cols() != expect)
        throw DimensionError("solution matrix does not match the lift layout");

    const RMatrix m11 = sol.m_opt.block(0, 0, mc, mc);
    const RMatrix m22 = sol.m_opt.block(mc, mc, mc, mc);
    const RMatrix m12 = sol.m_opt.block(0, mc, mc, mc);

    const double scale = 1.0 + m11.cwiseAbs().maxCoeff();
    if ((m11 - m22).cwiseAbs().maxCoeff() > 1e-6 * scale ||
        (m12 + m12.transpose()).cwiseAbs().maxCoeff() > 1e-6 * scale) {
        std::ostringstream os;
        os << "doubled solution blocks disagree (diag "
           << (m11 - m22).cwiseAbs().maxCoeff() << ", skew "
           << (m12 + m12.transpose()).cwiseAbs().maxCoeff()
           << "); solver output is inconsistent";
        throw NumericalError(os.str());
    }

    CMatrix full(mc, mc);
    full.real() = 0.5 * (m11 + m22);
    full.imag() = 0.5 * (m12.transpose() - m12);
    full = 0.5 * (full + full.adjoint()).eval();

    Eigen::SelfAdjointEigenSolver<CMatrix> es(full, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
    if (lo < -1e-7 * (1.0 + hi)) {
        std::ostringstream os;
        os << "recovered moment matrix is not positive semidefinite (min "
              "eigenvalue "
           << lo << ")";
        throw NumericalError(os.str());
    }

    ComplexBlocks out;
    out.y_mat = full.topLeftCorner(n, n);
    out.y_vec = full.col(n).head(n);
    out.sigma = full(n, n).real();
    return out;
}

}  // namespace embounds
