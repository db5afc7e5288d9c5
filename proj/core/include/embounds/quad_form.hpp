#pragma once

#include "embounds/common.hpp"

namespace embounds {

// Inhomogeneous complex quadratic form
//     value(y) = y^H R y + y^H p + q^H y + tau.
// Objectives keep R Hermitian and p == q so the value is real; equality
// constraints are generally non-Hermitian and complex-valued.
struct QuadraticForm {
    CMatrix r_mat;
    CVector p;
    CVector q;
    cxd tau{0.0, 0.0};

    int dim() const { return static_cast<int>(r_mat.rows()); }

    cxd value(const CVector& y) const;

    // tr(R Y) + y^H p + q^H y + tau * corner, the lifted counterpart where
    // `corner` is the homogenization entry (1, or sigma after scaling).
    cxd lifted_value(const CMatrix& y_mat, const CVector& y, cxd corner) const;

    // [[R, p], [q^H, tau]]: tr(bordered() * M) == lifted_value on
    // M = [[Y, y], [y^H, corner]].
    CMatrix bordered() const;

    bool is_hermitian(double tol = 1e-12) const;

    void check_dims() const;
};

}  // namespace embounds
