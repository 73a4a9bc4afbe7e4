#include "fdmimo/linalg.hpp"

#include <cmath>

namespace fdmimo::linalg {

Mat hermitian_part(const Mat& a) { return 0.5 * (a + a.adjoint()); }

Mat regularized(const Mat& a) {
  Mat r = hermitian_part(a);
  const auto n = r.rows();
  if (n == 0) return r;
  const double shift = kRidge * std::abs(r.trace().real()) / static_cast<double>(n);
  r.diagonal().array() += shift;
  return r;
}

namespace {

Eigen::LLT<Mat> factor(const Mat& a) {
  Eigen::LLT<Mat> llt(regularized(a));
  if (llt.info() != Eigen::Success) {
    throw NumericalError("matrix is not positive definite");
  }
  return llt;
}

}  // namespace

Mat hpd_solve(const Mat& a, const Mat& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw ConfigError("hpd_solve: dimension mismatch");
  }
  if (a.rows() == 0) return b;
  return factor(a).solve(b);
}

Mat hpd_inverse(const Mat& a) {
  return hermitian_part(hpd_solve(a, Mat::Identity(a.rows(), a.cols())));
}

double hpd_logdet(const Mat& a) {
  if (a.rows() == 0) return 0.0;
  auto llt = factor(a);
  const Mat& l = llt.matrixLLT();
  double s = 0.0;
  for (Eigen::Index n = 0; n < l.rows(); ++n) s += std::log(l(n, n).real());
  return 2.0 * s;
}

double min_eigenvalue(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double hermitian_defect(const Mat& a) { return (a - a.adjoint()).cwiseAbs().maxCoeff(); }

}  // namespace fdmimo::linalg
