#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace embounds {

using cxd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shape / index mismatches between model blocks and inputs.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Ill-conditioned resolvents, factorization breakdowns, divergence.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Bad user-facing input: JSON fields, sweep configs, CLI arguments.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Largest singular value. Sizes here are small (<= a few hundred), so an
// exact SVD is cheaper than getting a power iteration robust.
double spectral_norm(const CMatrix& m);
double spectral_norm(const RMatrix& m);

// tr(a^H b), the Frobenius inner product.
cxd frobenius_inner(const CMatrix& a, const CMatrix& b);

std::string format_complex(cxd v);

}  // namespace embounds
