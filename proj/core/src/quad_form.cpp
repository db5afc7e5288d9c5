#include "embounds/quad_form.hpp"

namespace embounds {

void QuadraticForm::check_dims() const {
    if (r_mat.rows() != r_mat.cols())
        throw DimensionError("quadratic form matrix must be square");
    if (p.size() != r_mat.rows() || q.size() != r_mat.rows())
        throw DimensionError("quadratic form vector sizes must match matrix");
}

cxd QuadraticForm::value(const CVector& y) const {
    if (y.size() != r_mat.rows())
        throw DimensionError("quadratic form evaluated at wrong dimension");
    return (y.adjoint() * r_mat * y).value() + y.dot(p) + q.dot(y) + tau;
}

cxd QuadraticForm::lifted_value(const CMatrix& y_mat, const CVector& y,
                                cxd corner) const {
    if (y_mat.rows() != r_mat.rows() || y_mat.cols() != r_mat.cols() ||
        y.size() != r_mat.rows())
        throw DimensionError("lifted value evaluated at wrong dimension");
    return (r_mat * y_mat).trace() + y.dot(p) + q.dot(y) + tau * corner;
}

CMatrix QuadraticForm::bordered() const {
    const Eigen::Index n = r_mat.rows();
    CMatrix k(n + 1, n + 1);
    k.topLeftCorner(n, n) = r_mat;
    k.col(n).head(n) = p;
    k.row(n).head(n) = q.adjoint();
    k(n, n) = tau;
    return k;
}

bool QuadraticForm::is_hermitian(double tol) const {
    const CMatrix k = bordered();
    return (k - k.adjoint()).cwiseAbs().maxCoeff() <=
           tol * (1.0 + k.cwiseAbs().maxCoeff());
}

}  // namespace embounds
