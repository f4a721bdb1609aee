#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <random>

#include "qvdp/fock.hpp"

namespace qvdp::test {

inline MatrixXc random_matrix(int dim, std::mt19937& rng) {
  std::normal_distribution<double> g;
  MatrixXc m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) m(r, c) = Complex(g(rng), g(rng));
  return m;
}

/// Random full-rank state with a geometric population envelope so the Fock tail stays small.
inline DensityMatrix random_state(const FockTruncation& trunc, std::mt19937& rng, double decay = 0.6) {
  const int n = trunc.n_levels();
  MatrixXc g = random_matrix(n, rng);
  for (int r = 0; r < n; ++r) g.row(r) *= std::pow(decay, r);
  MatrixXc rho = g * g.adjoint();
  rho /= rho.trace().real();
  return {hermitized<double>(rho), trunc.phonon()};
}

/// Scaling-and-squaring exponential of (beta a^dag - beta* a) on `levels` Fock levels.
inline MatrixXc expm_displacement(int levels, Complex beta) {
  const MatrixXc a = annihilation_matrix<double>(levels);
  const MatrixXc gen = beta * a.adjoint() - std::conj(beta) * a;
  return gen.exp();
}

/// W(alpha) = (2/pi) Tr[rho D(alpha) P D(alpha)^dag] with D from the matrix exponential on a padded space.
inline double wigner_oracle(const DensityMatrix& rho, Complex alpha, int padded_levels = 90) {
  const int n = rho.dim();
  MatrixXc big = MatrixXc::Zero(padded_levels, padded_levels);
  big.topLeftCorner(n, n) = rho.matrix();
  const MatrixXc d = expm_displacement(padded_levels, alpha);
  const MatrixXc shifted = d.adjoint() * big * d;
  double w = 0.0;
  for (int k = 0; k < padded_levels; ++k) w += (k % 2 == 0 ? 1.0 : -1.0) * shifted(k, k).real();
  return 2.0 / std::numbers::pi * w;
}

}  // namespace qvdp::test
