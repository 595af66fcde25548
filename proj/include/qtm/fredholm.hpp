#pragma once
// Nystrom discretisation of (id + K) on a quadrature grid, with LU-backed
// solves, resolvent evaluation and Fredholm determinants.

#include <Eigen/Dense>
#include <functional>

#include "qtm/quadrature.hpp"

namespace qtm {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

struct NystromOperator {
  QuadratureGrid grid;
  std::function<cplx(cplx)> kern;  // difference kernel K(lam - mu)
  Mat A;                           // I + K W
  Eigen::PartialPivLU<Mat> lu;
  double cond_estimate = 0.0;

  void build(const QuadratureGrid& g, std::function<cplx(cplx)> K) {
    grid = g;
    kern = std::move(K);
    int n = grid.size();
    A = Mat::Identity(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        A(i, j) += grid.weights[j] * kern(grid.nodes[i] - grid.nodes[j]);
    lu.compute(A);
    // crude condition estimate: ||A||_inf * ||A^{-1} e||_inf on a probe
    double anorm = A.cwiseAbs().rowwise().sum().maxCoeff();
    Vec probe = Vec::Ones(n);
    Vec sol = lu.solve(probe);
    cond_estimate = anorm * sol.cwiseAbs().maxCoeff();
    if (cond_estimate > 1e12)
      throw err("SingularSystem", "Nystrom matrix condition estimate > 1e12");
  }

  Vec solve(const Vec& rhs) const { return lu.solve(rhs); }

  // f(lam) for arbitrary lam via the extension of the integral equation:
  // f(lam) = rhs(lam) - int K(lam-mu) f(mu) dmu
  cplx extend(cplx lam, const Vec& f, const std::function<cplx(cplx)>& rhs) const {
    cplx s = rhs(lam);
    for (int j = 0; j < grid.size(); ++j)
      s -= grid.weights[j] * kern(lam - grid.nodes[j]) * f(j);
    return s;
  }
  // d/dlam of the extension, given rhs'
  cplx extend_prime(cplx lam, const Vec& f,
                    const std::function<cplx(cplx)>& rhs_prime,
                    const std::function<cplx(cplx)>& kern_prime) const {
    cplx s = rhs_prime(lam);
    for (int j = 0; j < grid.size(); ++j)
      s -= grid.weights[j] * kern_prime(lam - grid.nodes[j]) * f(j);
    return s;
  }

  // resolvent column rho_i = R(nu_i, mu) for arbitrary mu:
  // (id + K W) rho = K(. - mu)
  Vec resolvent_column(cplx mu) const {
    Vec k(grid.size());
    for (int i = 0; i < grid.size(); ++i) k(i) = kern(grid.nodes[i] - mu);
    return lu.solve(k);
  }
  // R(lam, mu) = K(lam-mu) - sum_j w_j K(lam-nu_j) rho_j(mu)
  cplx resolvent(cplx lam, cplx mu, const Vec& rho) const {
    cplx s = kern(lam - mu);
    for (int j = 0; j < grid.size(); ++j)
      s -= grid.weights[j] * kern(lam - grid.nodes[j]) * rho(j);
    return s;
  }
  cplx resolvent(cplx lam, cplx mu) const {
    return resolvent(lam, mu, resolvent_column(mu));
  }

  cplx det() const {  // Fredholm determinant of the Nystrom matrix
    cplx d = 1.0;
    const Mat& U = lu.matrixLU();
    for (int i = 0; i < U.rows(); ++i) d *= U(i, i);
    return d * double(lu.permutationP().determinant());
  }
};

// generic (non-difference) kernel variant, used for the Fredholm-determinant
// cross-checks where the kernel carries a Fermi-weight factor
inline cplx nystrom_det(const QuadratureGrid& g,
                        const std::function<cplx(cplx, cplx)>& K2) {
  int n = g.size();
  Mat A = Mat::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      A(i, j) += g.weights[j] * K2(g.nodes[i], g.nodes[j]);
  Eigen::PartialPivLU<Mat> lu(A);
  cplx d = 1.0;
  const Mat& U = lu.matrixLU();
  for (int i = 0; i < n; ++i) d *= U(i, i);
  return d * double(lu.permutationP().determinant());
}

}  // namespace qtm
