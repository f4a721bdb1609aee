#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "qvdp/lindblad.hpp"

namespace qvdp {

namespace {

constexpr double kShift = 1e-7;           // sigma / ||L||
constexpr double kZeroEigenvalue = 1e-6;  // |lambda0| / ||L|| acceptance
constexpr double kDegenerate = 1e-8;      // |lambda1| / ||L|| below which the null space is not unique
constexpr double kMinGapRatio = 100.0;    // |lambda1| / |lambda0|
constexpr int kArnoldiSteps = 24;
constexpr int kMaxInverseIterations = 30;

double norm1(const SparseMatrixXc& s) {
  double best = 0.0;
  for (int c = 0; c < s.outerSize(); ++c) {
    double col = 0.0;
    for (SparseMatrixXc::InnerIterator it(s, c); it; ++it) col += std::abs(it.value());
    best = std::max(best, col);
  }
  return best;
}

std::string describe(Complex z) { return "(" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")"; }

}  // namespace

MatrixXc steady_state(const LindbladGenerator& gen, SteadyStateReport* report) {
  SteadyStateReport local;
  SteadyStateReport& rep = report != nullptr ? *report : local;
  rep = SteadyStateReport{};

  bool any_rate = false;
  for (const auto& ch : gen.channels()) any_rate = any_rate || ch.rate > 0.0;
  if (!any_rate) throw SteadyStateError(SteadyStateError::Kind::no_rates, "steady_state: no dissipative channel");

  const int n = gen.dim();
  const int nn = n * n;
  const SparseMatrixXc s = gen.superoperator();
  rep.norm = norm1(s);
  const double sigma = kShift * rep.norm;

  SparseMatrixXc shifted = s;
  {
    SparseMatrixXc id(nn, nn);
    id.setIdentity();
    shifted -= Complex(sigma) * id;
  }
  Eigen::SparseLU<SparseMatrixXc, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(shifted);
  lu.factorize(shifted);
  if (lu.info() != Eigen::Success)
    throw SteadyStateError(SteadyStateError::Kind::no_zero_eigenvalue,
                           "steady_state: factorization of L - sigma I failed: " + lu.lastErrorMessage());

  // Inverse iteration toward the eigenvalue nearest zero, starting from vec(I)/n.
  VectorXc x = VectorXc::Zero(nn);
  for (int i = 0; i < n; ++i) x(i * n + i) = 1.0 / n;
  x.normalize();
  Complex lambda0 = (x.adjoint() * (s * x))(0, 0);
  for (int it = 0; it < kMaxInverseIterations; ++it) {
    VectorXc y = lu.solve(x);
    y.normalize();
    const VectorXc sy = s * y;
    const Complex next = y.dot(sy);
    const double resid = (sy - next * y).norm();
    x = std::move(y);
    const bool settled = std::abs(next - lambda0) <= 1e-14 * rep.norm || resid <= 1e-13 * rep.norm;
    lambda0 = next;
    if (settled && it >= 2) break;
  }
  rep.lambda0 = lambda0;
  if (std::abs(lambda0) > kZeroEigenvalue * rep.norm)
    throw SteadyStateError(SteadyStateError::Kind::no_zero_eigenvalue,
                           "steady_state: eigenvalue nearest zero is " + describe(lambda0) +
                               ", above 1e-6 ||L|| = " + std::to_string(kZeroEigenvalue * rep.norm));

  // Arnoldi on P (L - sigma)^{-1} P with P = I - x x^dag. The compression has the remaining
  // eigenvalues of the shifted inverse, so the dominant Ritz value maps to lambda1.
  const int m = std::min(kArnoldiSteps, nn - 1);
  if (m >= 1) {
    MatrixXc v = MatrixXc::Zero(nn, m + 1);
    MatrixXc h = MatrixXc::Zero(m + 1, m);
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> gauss;
    VectorXc start(nn);
    for (int i = 0; i < nn; ++i) start(i) = Complex(gauss(rng), gauss(rng));
    start -= x * x.dot(start);
    v.col(0) = start.normalized();
    int built = m;
    for (int j = 0; j < m; ++j) {
      VectorXc w = lu.solve(v.col(j));
      w -= x * x.dot(w);
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= j; ++i) {
          const Complex c = v.col(i).dot(w);
          h(i, j) += c;
          w -= c * v.col(i);
        }
      const double beta = w.norm();
      h(j + 1, j) = beta;
      if (beta <= 1e-12 * h.col(j).norm()) {
        built = j + 1;
        break;
      }
      v.col(j + 1) = w / beta;
    }
    Eigen::ComplexEigenSolver<MatrixXc> es(h.topLeftCorner(built, built), false);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < built; ++i) {
      const Complex mu = es.eigenvalues()(i);
      if (std::abs(mu) * sigma < 1e-12) continue;  // image of the deflated direction
      const Complex lambda = sigma + 1.0 / mu;
      if (std::abs(lambda) < best) {
        best = std::abs(lambda);
        rep.lambda1 = lambda;
      }
    }
    if (std::abs(rep.lambda1) <= kDegenerate * rep.norm)
      throw SteadyStateError(SteadyStateError::Kind::degenerate,
                             "steady_state: second eigenvalue " + describe(rep.lambda1) +
                                 " is within 1e-8 ||L|| of zero; the steady state is not unique");
    if (std::abs(rep.lambda1) <= kMinGapRatio * std::abs(lambda0))
      throw SteadyStateError(SteadyStateError::Kind::small_gap,
                             "steady_state: gap |lambda1| = " + std::to_string(std::abs(rep.lambda1)) +
                                 " too small against |lambda0| = " + std::to_string(std::abs(lambda0)));
  }

  MatrixXc rho = Eigen::Map<const MatrixXc>(x.data(), n, n);
  rho = hermitized<double>(rho);
  rho /= rho.trace();
  rho = hermitized<double>(rho);
  rep.residual = gen.apply(rho).cwiseAbs().maxCoeff();
  return rho;
}

DensityMatrix steady_state(const VdpParams& params, SteadyStateReport* report) {
  params.validate();
  if (!params.has_dissipation())
    throw SteadyStateError(SteadyStateError::Kind::no_rates,
                           "steady_state: all of gamma1_plus, gamma1_minus, gamma2, gamma_h are zero");
  SteadyStateReport local;
  SteadyStateReport& rep = report != nullptr ? *report : local;
  const LindbladGenerator gen(params);
  MatrixXc rho = steady_state(gen, &rep);
  const SpaceTag tag = params.trunc.phonon();
  rep.tail = tail_population<double>(rho, tag);
  if (rep.tail > params.trunc.tail_tolerance)
    rep.flags.raise("steady_state: top-two-level population " + std::to_string(rep.tail) +
                    " exceeds tail tolerance; raise n_max");
  return DensityMatrix(std::move(rho), tag);
}

}  // namespace qvdp
