#pragma once

#include "fdmimo/types.hpp"

namespace fdmimo::linalg {

/// Relative ridge added to Hermitian systems before factorization.
inline constexpr double kRidge = 1e-12;

/// (A + A^H) / 2
Mat hermitian_part(const Mat& a);

/// Adds kRidge * tr(A)/n to the diagonal of a Hermitian PSD matrix.
Mat regularized(const Mat& a);

/// Solves A X = B for Hermitian PSD A after relative ridge regularization.
/// Throws NumericalError when A is not positive definite even after the ridge.
Mat hpd_solve(const Mat& a, const Mat& b);

/// Inverse of a Hermitian PSD matrix (regularized), Hermitian by construction.
Mat hpd_inverse(const Mat& a);

/// Natural log-determinant of a Hermitian positive-definite matrix.
double hpd_logdet(const Mat& a);

/// Smallest eigenvalue of a Hermitian matrix.
double min_eigenvalue(const Mat& a);

/// Largest absolute entry of A - A^H.
double hermitian_defect(const Mat& a);

}  // namespace fdmimo::linalg
