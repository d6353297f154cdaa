#include "formcalc/random.hpp"

#include <Eigen/QR>

namespace formcalc::random {

double uniform(Engine& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

cplx gaussian_complex(Engine& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  const double re = nd(rng);
  const double im = nd(rng);
  return {re, im};
}

CVector gaussian_vector(Engine& rng, Index n) {
  CVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = gaussian_complex(rng);
  return v;
}

CMatrix gaussian_matrix(Engine& rng, Index rows, Index cols) {
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = gaussian_complex(rng);
  return m;
}

CVector unit_vector(Engine& rng, Index n) {
  CVector v = gaussian_vector(rng, n);
  return v / v.norm();
}

CMatrix unitary(Engine& rng, Index n) {
  Eigen::HouseholderQR<CMatrix> qr(gaussian_matrix(rng, n, n));
  return qr.householderQ() * CMatrix::Identity(n, n);
}

CMatrix hermitian_pd(Engine& rng, Index n, double lo, double hi) { return hermitian_psd_rank(rng, n, n, lo, hi); }

CMatrix hermitian_psd_rank(Engine& rng, Index n, Index rank, double lo, double hi) {
  const CMatrix u = unitary(rng, n);
  RVector eig = RVector::Zero(n);
  for (Index i = 0; i < rank && i < n; ++i) eig(i) = uniform(rng, lo, hi);
  CMatrix a = u * eig.cast<cplx>().asDiagonal() * u.adjoint();
  return 0.5 * (a + a.adjoint());
}

}  // namespace formcalc::random
