#pragma once

// Quantum van der Pol master equation in the frame rotating with the drive:
//
//   drho/dt = -i[H, rho] + (g1p + gh) D[a^dag] rho + (g1m + gh) D[a] rho + g2 D[a^2] rho
//   H = -delta n + i omega (a^dag e^{i chi} - a e^{-i chi})
//       + i omega2/2 (a^dag^2 e^{2i(theta + chi)} - a^2 e^{-2i(theta + chi)})
//
// chi (drive_phase) = 0 is the bare form. theta is measured relative to the drive.

#include <Eigen/SparseCore>

#include <vector>

#include "qvdp/fock.hpp"

namespace qvdp {

using SparseMatrixXc = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;

struct VdpParams {
  double delta = 0.0;         // rad/s
  double omega = 0.0;         // rad/s
  double omega2 = 0.0;        // rad/s
  double theta = 0.0;         // rad
  double drive_phase = 0.0;   // rad
  double gamma1_plus = 0.0;   // 1/s
  double gamma1_minus = 0.0;  // 1/s
  double gamma2 = 0.0;        // 1/s
  double gamma_h = 0.0;       // 1/s
  FockTruncation trunc{};

  void validate() const;
  bool has_dissipation() const { return gamma1_plus > 0 || gamma1_minus > 0 || gamma2 > 0 || gamma_h > 0; }
};

struct JumpChannel {
  double rate = 0.0;
  SparseMatrixXc op;
};

/// rho -> -i[H, rho] + sum_k rate_k D[O_k] rho on a space of any dimension.
class LindbladGenerator {
 public:
  LindbladGenerator(SparseMatrixXc hamiltonian, std::vector<JumpChannel> channels);
  explicit LindbladGenerator(const VdpParams& params);

  int dim() const { return static_cast<int>(h_.rows()); }
  const SparseMatrixXc& hamiltonian() const { return h_; }
  const std::vector<JumpChannel>& channels() const { return channels_; }

  /// out = L(rho). rho need not be Hermitian.
  void apply(const MatrixXc& rho, MatrixXc& out) const;
  MatrixXc apply(const MatrixXc& rho) const;

  /// Column-stacking superoperator: vec(L(rho)) = S vec(rho).
  SparseMatrixXc superoperator() const;

 private:
  SparseMatrixXc h_;
  SparseMatrixXc k_;  // H - (i/2) sum rate O^dag O
  std::vector<JumpChannel> channels_;
};

SparseMatrixXc to_sparse(const MatrixXc& dense);

Operator vdp_hamiltonian(const VdpParams& params);

/// D[O]rho = O rho O^dag - {O^dag O, rho}/2
Operator dissipator_apply(const Operator& jump, const DensityMatrix& rho);

Operator liouvillian_apply(const VdpParams& params, const DensityMatrix& rho);

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  VdpParams params;
};

inline constexpr double kDefaultDt = 1e-6;
inline constexpr double kEvolveTraceDrift = 1e-6;

/// Fixed-step RK4 from t = 0 to t_end, re-Hermitizing after every step. Steps never exceed dt;
/// they shrink to land exactly on each sample time. The trajectory always starts with (0, rho0)
/// and ends at t_end. Throws TraceDriftError or TruncationError.
Trajectory evolve(const DensityMatrix& rho0, const VdpParams& params, double t_end, double dt = kDefaultDt,
                  const std::vector<double>& sample_times = {});

/// Same integration for an arbitrary generator; used by the Trotter engine's exact reference.
std::vector<MatrixXc> integrate(const LindbladGenerator& gen, const MatrixXc& rho0,
                                const std::vector<double>& times, double dt);

struct SteadyStateReport {
  Complex lambda0{};        // eigenvalue attached to the returned state
  Complex lambda1{};        // next eigenvalue closest to zero
  double norm = 0.0;        // ||L||_1
  double residual = 0.0;    // ||L(rho_ss)||_max
  double tail = 0.0;        // population in the top two Fock levels
  Flags flags;
};

/// Null vector of the superoperator via shift-invert around zero (sparse LU). Throws SteadyStateError.
DensityMatrix steady_state(const VdpParams& params, SteadyStateReport* report = nullptr);
MatrixXc steady_state(const LindbladGenerator& gen, SteadyStateReport* report = nullptr);

}  // namespace qvdp
