#include "qvdp/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qvdp/rk4.hpp"

namespace qvdp {

namespace {

constexpr Complex kI{0.0, 1.0};

SparseMatrixXc sparse_identity(int n) {
  SparseMatrixXc id(n, n);
  id.setIdentity();
  return id;
}

void append_kron(std::vector<Eigen::Triplet<Complex>>& out, const SparseMatrixXc& a, const SparseMatrixXc& b,
                 Complex scale) {
  for (int ca = 0; ca < a.outerSize(); ++ca)
    for (SparseMatrixXc::InnerIterator ia(a, ca); ia; ++ia)
      for (int cb = 0; cb < b.outerSize(); ++cb)
        for (SparseMatrixXc::InnerIterator ib(b, cb); ib; ++ib)
          out.emplace_back(static_cast<int>(ia.row() * b.rows() + ib.row()), static_cast<int>(ca * b.cols() + cb),
                           scale * ia.value() * ib.value());
}

}  // namespace

void VdpParams::validate() const {
  trunc.validate();
  const auto check = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(std::string("VdpParams: ") + name + " must be finite and >= 0");
  };
  check(gamma1_plus, "gamma1_plus");
  check(gamma1_minus, "gamma1_minus");
  check(gamma2, "gamma2");
  check(gamma_h, "gamma_h");
  for (double v : {delta, omega, omega2, theta, drive_phase})
    if (!std::isfinite(v)) throw Error("VdpParams: Hamiltonian coefficients must be finite");
}

SparseMatrixXc to_sparse(const MatrixXc& dense) { return dense.sparseView(Complex(0.0), 0.0); }

Operator vdp_hamiltonian(const VdpParams& params) {
  params.validate();
  const auto ops = ladder_ops(params.trunc);
  const MatrixXc& a = ops.a.matrix();
  const MatrixXc& ad = ops.a_dagger.matrix();
  const Complex drive = std::polar(1.0, params.drive_phase);
  const Complex squeeze = std::polar(1.0, 2.0 * (params.theta + params.drive_phase));
  MatrixXc h = -params.delta * ops.n.matrix();
  h += kI * params.omega * (drive * ad - std::conj(drive) * a);
  h += kI * (0.5 * params.omega2) * (squeeze * ad * ad - std::conj(squeeze) * a * a);
  h = hermitized<double>(h);
  return {std::move(h), params.trunc.phonon()};
}

Operator dissipator_apply(const Operator& jump, const DensityMatrix& rho) {
  if (!(jump.tag() == rho.tag()))
    throw DimensionError("dissipator_apply: " + to_string(jump.tag()) + " vs " + to_string(rho.tag()));
  const MatrixXc& o = jump.matrix();
  const MatrixXc odo = o.adjoint() * o;
  MatrixXc out = o * rho.matrix() * o.adjoint() - 0.5 * (odo * rho.matrix() + rho.matrix() * odo);
  return {std::move(out), rho.tag()};
}

LindbladGenerator::LindbladGenerator(SparseMatrixXc hamiltonian, std::vector<JumpChannel> channels)
    : h_(std::move(hamiltonian)), channels_(std::move(channels)) {
  if (h_.rows() != h_.cols()) throw DimensionError("LindbladGenerator: Hamiltonian is not square");
  k_ = h_;
  for (const auto& ch : channels_) {
    if (ch.op.rows() != h_.rows() || ch.op.cols() != h_.cols())
      throw DimensionError("LindbladGenerator: jump operator dimension mismatch");
    if (!(ch.rate >= 0.0)) throw Error("LindbladGenerator: negative rate");
    SparseMatrixXc odo = SparseMatrixXc(ch.op.adjoint()) * ch.op;
    k_ -= (Complex(0.0, 0.5 * ch.rate) * odo).pruned();
  }
  k_.makeCompressed();
}

LindbladGenerator::LindbladGenerator(const VdpParams& params)
    : LindbladGenerator(to_sparse(vdp_hamiltonian(params).matrix()), [&] {
        const auto ops = ladder_ops(params.trunc);
        const MatrixXc a2 = ops.a.matrix() * ops.a.matrix();
        std::vector<JumpChannel> ch;
        const double up = params.gamma1_plus + params.gamma_h;
        const double down = params.gamma1_minus + params.gamma_h;
        if (up > 0) ch.push_back({up, to_sparse(ops.a_dagger.matrix())});
        if (down > 0) ch.push_back({down, to_sparse(ops.a.matrix())});
        if (params.gamma2 > 0) ch.push_back({params.gamma2, to_sparse(a2)});
        return ch;
      }()) {}

void LindbladGenerator::apply(const MatrixXc& rho, MatrixXc& out) const {
  if (rho.rows() != h_.rows() || rho.cols() != h_.cols())
    throw DimensionError("LindbladGenerator::apply: state dimension mismatch");
  // -i(K rho - rho K^dag) with rho K^dag = (K rho^dag)^dag
  out.noalias() = -kI * (k_ * rho);
  MatrixXc tmp = k_ * rho.adjoint();
  out.noalias() += kI * tmp.adjoint();
  for (const auto& ch : channels_) {
    MatrixXc x = ch.op * rho;                    // O rho
    MatrixXc y = ch.op * x.adjoint();            // (O rho O^dag)^dag
    out.noalias() += ch.rate * y.adjoint();
  }
}

MatrixXc LindbladGenerator::apply(const MatrixXc& rho) const {
  MatrixXc out(rho.rows(), rho.cols());
  apply(rho, out);
  return out;
}

SparseMatrixXc LindbladGenerator::superoperator() const {
  const int n = dim();
  const SparseMatrixXc id = sparse_identity(n);
  const SparseMatrixXc k_conj = k_.conjugate();
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(static_cast<std::size_t>(2 * n * k_.nonZeros() + n * n * 2 * channels_.size()));
  append_kron(trip, id, k_, -kI);
  append_kron(trip, k_conj, id, kI);
  for (const auto& ch : channels_) append_kron(trip, SparseMatrixXc(ch.op.conjugate()), ch.op, ch.rate);
  SparseMatrixXc s(n * n, n * n);
  s.setFromTriplets(trip.begin(), trip.end());
  s.makeCompressed();
  return s;
}

Operator liouvillian_apply(const VdpParams& params, const DensityMatrix& rho) {
  if (!(rho.tag() == params.trunc.phonon()))
    throw DimensionError("liouvillian_apply: state " + to_string(rho.tag()) + " vs params " +
                         to_string(params.trunc.phonon()));
  const LindbladGenerator gen(params);
  return {gen.apply(rho.matrix()), rho.tag()};
}

std::vector<MatrixXc> integrate(const LindbladGenerator& gen, const MatrixXc& rho0, const std::vector<double>& times,
                                double dt) {
  if (!(dt > 0.0)) throw Error("integrate: dt must be > 0");
  std::vector<MatrixXc> out;
  out.reserve(times.size());
  MatrixXc rho = rho0;
  Rk4<MatrixXc> rk;
  const auto rhs = [&gen](double, const MatrixXc& y, MatrixXc& dy) { gen.apply(y, dy); };
  double t = 0.0;
  for (double target : times) {
    if (target < t) throw Error("integrate: times must be non-decreasing from 0");
    const double span = target - t;
    const long steps = span > 0.0 ? static_cast<long>(std::ceil(span / dt - 1e-9)) : 0;
    const double h = steps > 0 ? span / static_cast<double>(steps) : 0.0;
    for (long s = 0; s < steps; ++s) {
      rk.step(rhs, t + static_cast<double>(s) * h, rho, h);
      rho = hermitized<double>(rho);
    }
    t = target;
    out.push_back(rho);
  }
  return out;
}

Trajectory evolve(const DensityMatrix& rho0, const VdpParams& params, double t_end, double dt,
                  const std::vector<double>& sample_times) {
  params.validate();
  if (!(dt > 0.0)) throw Error("evolve: dt must be > 0");
  if (!(t_end >= 0.0)) throw Error("evolve: t_end must be >= 0");
  if (!(rho0.tag() == params.trunc.phonon()))
    throw DimensionError("evolve: initial state " + to_string(rho0.tag()) + " vs params " +
                         to_string(params.trunc.phonon()));
  std::vector<double> times{0.0};
  for (double t : sample_times) {
    if (!(t >= 0.0 && t <= t_end)) throw Error("evolve: sample time " + std::to_string(t) + " outside [0, t_end]");
    times.push_back(t);
  }
  times.push_back(t_end);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  const LindbladGenerator gen(params);
  const auto states = integrate(gen, rho0.matrix(), times, dt);

  Trajectory traj;
  traj.params = params;
  traj.times = times;
  traj.states.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double drift = std::abs(states[i].trace() - Complex(1.0));
    if (drift > kEvolveTraceDrift)
      throw TraceDriftError("evolve: |Tr rho - 1| = " + std::to_string(drift) + " at t = " +
                            std::to_string(times[i]) + " s; reduce dt");
    if (times[i] > 0.0) {
      const double tail = tail_population<double>(states[i], params.trunc.phonon());
      if (tail > params.trunc.tail_tolerance)
        throw TruncationError("evolve: top-two-level population " + std::to_string(tail) + " at t = " +
                              std::to_string(times[i]) + " s; raise n_max");
    }
    traj.states.emplace_back(states[i], params.trunc.phonon(), kEvolvedTolerances);
  }
  return traj;
}

}  // namespace qvdp
