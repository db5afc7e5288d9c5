#include "embounds/common.hpp"

#include <sstream>

#include <Eigen/SVD>

namespace embounds {

double spectral_norm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
}

double spectral_norm(const RMatrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<RMatrix> svd(m);
    return svd.singularValues()(0);
}

cxd frobenius_inner(const CMatrix& a, const CMatrix& b) {
    return (a.adjoint() * b).trace();
}

std::string format_complex(cxd v) {
    std::ostringstream os;
    os << v.real();
    if (v.imag() >= 0)
        os << "+" << v.imag() << "j";
    else
        os << v.imag() << "j";
    return os.str();
}

}  // namespace embounds
