#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's numerical routines.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline cplx pairing(const Vec& v, const Vec& x) {
  cplx s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += v(i) * std::conj(x(i));
  return s;
}

inline double lp_norm(const Vec& x, double p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x(i)), p);
  return std::pow(s, 1.0 / p);
}

inline double smallest_eigenvalue(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  return es.eigenvalues()(0);
}

inline double largest_eigenvalue(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  return es.eigenvalues()(h.rows() - 1);
}

// sum_{n=first}^{last} f(n) with Kahan compensation.
template <class F>
double partial_sum(F f, long first, long last) {
  double s = 0.0, c = 0.0;
  for (long n = first; n <= last; ++n) {
    const double y = f(n) - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

// Riemann zeta at integer s > 1 via partial sum + Euler-Maclaurin tail.
inline double zeta(double s, long n = 10000) {
  double sum = partial_sum([s](long k) { return std::pow(static_cast<double>(k), -s); }, 1, n);
  const double N = static_cast<double>(n);
  sum += std::pow(N, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(N, -s) + s * std::pow(N, -s - 1.0) / 12.0;
  return sum;
}

// sup over x in span(Z), x^* F x <= 1, of |w^* x|^2 for Hermitian PD F = Z^* A Z
// in Z-coordinates: equals w^* F^{-1} w; computed here by brute eigen-decomposition.
inline double constrained_sup(const Mat& f, const Vec& w) {
  Eigen::SelfAdjointEigenSolver<Mat> es(f);
  double s = 0.0;
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam <= 1e-13 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff())) {
      if (std::abs(es.eigenvectors().col(i).dot(w)) > 1e-9) return INFINITY;
      continue;
    }
    s += std::norm(es.eigenvectors().col(i).dot(w)) / lam;
  }
  return s;
}

}  // namespace oracle
