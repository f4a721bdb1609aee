#include "qvdp/trotter.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>

#include "qvdp/rk4.hpp"

namespace qvdp {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Detuning of the laser from the spin transition, in units of the sideband order.
double carrier_offset(PulseKind kind, double omega_z) {
  switch (kind) {
    case PulseKind::bsb1:
    case PulseKind::squeeze_tone_b_plus:
    case PulseKind::squeeze_tone_b_minus:
      return omega_z;
    case PulseKind::rsb1:
    case PulseKind::squeeze_tone_r_plus:
    case PulseKind::squeeze_tone_r_minus:
      return -omega_z;
    case PulseKind::rsb2:
      return -2.0 * omega_z;
    default:
      throw ScheduleError(std::string("pulse kind ") + to_string(kind) + " has no laser field");
  }
}

// Slow part of the laser detuning: pulse detuning plus the squeeze-tone offset.
double slow_detuning(const Pulse& p, double squeeze_offset) {
  switch (p.kind) {
    case PulseKind::squeeze_tone_r_plus:
    case PulseKind::squeeze_tone_b_plus:
      return p.detuning + squeeze_offset;
    case PulseKind::squeeze_tone_r_minus:
    case PulseKind::squeeze_tone_b_minus:
      return p.detuning - squeeze_offset;
    default:
      return p.detuning;
  }
}

double prefactor(const Pulse& p, double eta) {
  return p.kind == PulseKind::rsb2 ? p.rabi / (eta * eta) : p.rabi / (2.0 * eta);
}

double full_detuning(const Pulse& p, double omega_z, double squeeze_offset) {
  return carrier_offset(p.kind, omega_z) + slow_detuning(p, squeeze_offset);
}

// M(t) with H = s+ (x) M + s- (x) M^dag: pref X(t) e^{-i(delta t + phi)},
// X(t)_{mn} = e^{i omega_z t (m - n)} exp(ikx)_{mn}.
void laser_block(const Pulse& p, double eta, double omega_z, double t, double delta, int n_levels, MatrixXc& m) {
  const MatrixXc& e = lamb_dicke_exponential(eta, n_levels);
  const Complex global = prefactor(p, eta) * std::polar(1.0, -(delta * t + p.phase));
  std::vector<Complex> rot(static_cast<std::size_t>(2 * n_levels - 1));
  const Complex step = std::polar(1.0, omega_z * t);
  rot[static_cast<std::size_t>(n_levels - 1)] = 1.0;
  for (int k = 1; k < n_levels; ++k) {
    rot[static_cast<std::size_t>(n_levels - 1 + k)] = rot[static_cast<std::size_t>(n_levels - 2 + k)] * step;
    rot[static_cast<std::size_t>(n_levels - 1 - k)] = std::conj(rot[static_cast<std::size_t>(n_levels - 1 + k)]);
  }
  m.resize(n_levels, n_levels);
  for (int c = 0; c < n_levels; ++c)
    for (int r = 0; r < n_levels; ++r) m(r, c) = global * rot[static_cast<std::size_t>(n_levels - 1 + r - c)] * e(r, c);
}

// out += -i [H, rho] for H = s+ (x) M + s- (x) M^dag on the (down, up) block layout.
void add_offdiag_commutator(const MatrixXc& m, const MatrixXc& rho, MatrixXc& out, int n) {
  out.topRows(n).noalias() -= kI * (m.adjoint() * rho.bottomRows(n));
  out.bottomRows(n).noalias() -= kI * (m * rho.topRows(n));
  out.leftCols(n).noalias() += kI * (rho.rightCols(n) * m);
  out.rightCols(n).noalias() += kI * (rho.leftCols(n) * m.adjoint());
}

// out += -i [-nu P_up, rho]
void add_spin_frame(double nu, const MatrixXc& rho, MatrixXc& out, int n) {
  if (nu == 0.0) return;
  out.bottomRows(n) += (kI * nu) * rho.bottomRows(n);
  out.rightCols(n) -= (kI * nu) * rho.rightCols(n);
}

// rho -> V^dag rho V with V = exp(-i nu t P_up) (forward) or its inverse.
void spin_frame_transform(MatrixXc& rho, double nu, double t, int n, bool forward) {
  if (nu == 0.0) return;
  const Complex f = std::polar(1.0, (forward ? 1.0 : -1.0) * nu * t);
  rho.bottomLeftCorner(n, n) *= f;
  rho.topRightCorner(n, n) *= std::conj(f);
}

SparseMatrixXc joint_sparse(const MatrixXc& spin, const MatrixXc& phonon) { return to_sparse(kron(spin, phonon)); }

// Floquet propagator over one trap period for H'(t) = laser(t) - nu P_up, t in [0, T_p], with the
// laser at its bare sideband offset delta0 (the slow detuning lives in nu).
MatrixXc period_propagator(const Pulse& p, double eta, double omega_z, int n_levels, double nu, int substeps) {
  const double period = kTwoPi / omega_z;
  const double h = period / substeps;
  const int dim = 2 * n_levels;
  MatrixXc u = MatrixXc::Identity(dim, dim);
  MatrixXc m;
  const auto rhs = [&](double t, const MatrixXc& y, MatrixXc& dy) {
    laser_block(p, eta, omega_z, t, carrier_offset(p.kind, omega_z), n_levels, m);
    dy.resize(dim, dim);
    dy.topRows(n_levels).noalias() = -kI * (m.adjoint() * y.bottomRows(n_levels));
    dy.bottomRows(n_levels).noalias() = -kI * (m * y.topRows(n_levels));
    dy.bottomRows(n_levels) += (kI * nu) * y.bottomRows(n_levels);
  };
  Rk4<MatrixXc> rk;
  for (int s = 0; s < substeps; ++s) rk.step(rhs, s * h, u, h);
  Eigen::JacobiSVD<MatrixXc> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

struct PropagatorKey {
  int kind;
  double rabi, phase, nu, eta, omega_z;
  int n_levels, substeps;
  auto tie() const { return std::tie(kind, rabi, phase, nu, eta, omega_z, n_levels, substeps); }
  bool operator<(const PropagatorKey& o) const { return tie() < o.tie(); }
};

const MatrixXc& cached_period_propagator(const Pulse& p, double eta, double omega_z, int n_levels, double nu,
                                         int substeps) {
  static std::mutex mutex;
  static std::map<PropagatorKey, MatrixXc> cache;
  const PropagatorKey key{static_cast<int>(p.kind), p.rabi, p.phase, nu, eta, omega_z, n_levels, substeps};
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  MatrixXc u = period_propagator(p, eta, omega_z, n_levels, nu, substeps);
  std::lock_guard<std::mutex> lock(mutex);
  return cache.emplace(key, std::move(u)).first->second;
}

// Joint indices (lower, upper) of the lowest resonant pair.
std::pair<int, int> resonant_pair(PulseKind kind, int n_levels) {
  switch (kind) {
    case PulseKind::rsb1:
    case PulseKind::squeeze_tone_r_plus:
    case PulseKind::squeeze_tone_r_minus:
      return {1, n_levels};  // |down,1>, |up,0>
    case PulseKind::bsb1:
    case PulseKind::squeeze_tone_b_plus:
    case PulseKind::squeeze_tone_b_minus:
      return {0, n_levels + 1};  // |down,0>, |up,1>
    case PulseKind::rsb2:
      return {2, n_levels};  // |down,2>, |up,0>
    default:
      throw ScheduleError(std::string("pulse kind ") + to_string(kind) + " has no resonance");
  }
}

class Engine {
 public:
  Engine(const PulseSchedule& s, const TrotterOptions& o) : s_(s), o_(o), n_(s.trunc.n_levels()) {
    const auto ops = ladder_ops(s.trunc);
    const MatrixXc id2 = MatrixXc::Identity(2, 2);
    a_ = joint_sparse(id2, ops.a.matrix());
    ad_ = joint_sparse(id2, ops.a_dagger.matrix());
    a2_ = a_ * a_;
    ad2_ = ad_ * ad_;
    const MatrixXc sp = spin::sigma_plus();
    sp_a_ = joint_sparse(sp, ops.a.matrix());
    sp_ad_ = joint_sparse(sp, ops.a_dagger.matrix());
    sp_a2_ = joint_sparse(sp, ops.a.matrix() * ops.a.matrix());
    SparseMatrixXc h0 = (Complex(s.trap_offset) * joint_sparse(id2, ops.n.matrix())).pruned();
    std::vector<JumpChannel> heating;
    if (s.gamma_h > 0) {
      heating.push_back({s.gamma_h, a_});
      heating.push_back({s.gamma_h, ad_});
    }
    static_ = std::make_unique<LindbladGenerator>(std::move(h0), std::move(heating));
  }

  void run_window(MatrixXc& rho, double t0, double duration, const std::vector<Pulse>& group) {
    if (duration <= 0.0) return;
    std::vector<const Pulse*> lasers;
    for (const auto& p : group)
      if (is_laser(p.kind) && p.rabi != 0.0) lasers.push_back(&p);
    if (lasers.empty() || o_.mode == FidelityMode::rotating_wave) {
      integrate_rk4(rho, t0, duration, o_.dt, [&](double t, const MatrixXc& y, MatrixXc& dy) {
        background(t, y, dy, lasers);
      });
      return;
    }
    const double period = kTwoPi / s_.omega_z;
    const double fine = period / o_.period_substeps;
    if (lasers.size() > 1) {
      integrate_rk4(rho, t0, duration, fine, [&](double t, const MatrixXc& y, MatrixXc& dy) {
        background(t, y, dy, {});
        for (const Pulse* p : lasers) {
          laser_block(*p, s_.eta, s_.omega_z, t, full_detuning(*p, s_.omega_z, s_.squeeze_offset), n_, m_);
          add_offdiag_commutator(m_, y, dy, n_);
        }
      });
      return;
    }
    run_periodic(rho, t0, duration, *lasers.front());
  }

 private:
  template <typename Rhs>
  void integrate_rk4(MatrixXc& rho, double t0, double duration, double max_step, Rhs&& rhs) {
    const long steps = static_cast<long>(std::ceil(duration / max_step - 1e-9));
    const double h = duration / static_cast<double>(steps);
    for (long k = 0; k < steps; ++k) {
      rk_.step(rhs, t0 + static_cast<double>(k) * h, rho, h);
      rho = hermitized<double>(rho);
    }
  }

  // Single full-Hamiltonian laser: Floquet propagator per trap period, Strang-split with the
  // background (drive, squeeze, trap offset, heating), all in the spin frame of the slow detuning.
  void run_periodic(MatrixXc& rho, double t0, double duration, const Pulse& p) {
    const double period = kTwoPi / s_.omega_z;
    double nu = slow_detuning(p, s_.squeeze_offset);
    if (o_.calibrate_resonance) nu += resonance_correction(p, s_.eta, s_.omega_z, s_.trunc, o_.period_substeps);
    const MatrixXc& up = cached_period_propagator(p, s_.eta, s_.omega_z, n_, nu, o_.period_substeps);
    // U over [t0 + k T_p, t0 + (k+1) T_p] = W U_p W^dag, W = exp(-i delta0 s P_up) (x) exp(i omega_z s n)
    const double phase_time = std::fmod(t0, period);
    const double delta0 = carrier_offset(p.kind, s_.omega_z);
    VectorXc w(2 * n_);
    for (int spin_index = 0; spin_index < 2; ++spin_index)
      for (int k = 0; k < n_; ++k)
        w(spin_index * n_ + k) = std::polar(1.0, -delta0 * phase_time * spin_index + s_.omega_z * phase_time * k);
    const MatrixXc u = w.asDiagonal() * up * w.conjugate().asDiagonal();

    spin_frame_transform(rho, nu, t0, n_, true);
    const long whole = static_cast<long>(std::floor(duration / period + 1e-9));
    const auto bg = [&](double t, const MatrixXc& y, MatrixXc& dy) { background(t, y, dy, {}); };
    double t = t0;
    for (long k = 0; k < whole; ++k) {
      rk_.step(bg, t, rho, 0.5 * period);
      rho = u * rho * u.adjoint();
      rk_.step(bg, t + 0.5 * period, rho, 0.5 * period);
      rho = hermitized<double>(rho);
      t += period;
    }
    const double rest = t0 + duration - t;
    if (rest > 1e-15) {
      integrate_rk4(rho, t, rest, period / o_.period_substeps, [&](double tt, const MatrixXc& y, MatrixXc& dy) {
        background(tt, y, dy, {});
        laser_block(p, s_.eta, s_.omega_z, tt, delta0, n_, m_);
        add_offdiag_commutator(m_, y, dy, n_);
        add_spin_frame(nu, y, dy, n_);
      });
    }
    spin_frame_transform(rho, nu, t0 + duration, n_, false);
  }

  // Drive, effective squeeze, trap offset, heating and rotating-wave laser terms.
  void background(double t, const MatrixXc& rho, MatrixXc& out, const std::vector<const Pulse*>& rwa) const {
    static_->apply(rho, out);
    SparseMatrixXc h(2 * n_, 2 * n_);
    bool any = false;
    const auto add = [&](Complex c, const SparseMatrixXc& op, const SparseMatrixXc& op_dag) {
      h += c * op + std::conj(c) * op_dag;
      any = true;
    };
    const double delta = s_.drive ? s_.drive->detuning : 0.0;
    const double chi = s_.drive ? s_.drive->phase : 0.0;
    if (s_.drive && s_.drive->omega != 0.0)
      add(kI * s_.drive->omega * std::polar(1.0, chi - delta * t), ad_, a_);
    if (s_.squeeze && s_.squeeze->omega2 != 0.0)
      add(kI * 0.5 * s_.squeeze->omega2 * std::polar(1.0, 2.0 * (s_.squeeze->theta + chi) - 2.0 * delta * t), ad2_, a2_);
    for (const Pulse* p : rwa) {
      const Complex phase = std::polar(1.0, -(slow_detuning(*p, s_.squeeze_offset) * t + p->phase));
      const double half = 0.5 * p->rabi;
      switch (p->kind) {
        case PulseKind::rsb1:
        case PulseKind::squeeze_tone_r_plus:
        case PulseKind::squeeze_tone_r_minus:
          add(kI * half * phase, sp_a_, SparseMatrixXc(sp_a_.adjoint()));
          break;
        case PulseKind::bsb1:
        case PulseKind::squeeze_tone_b_plus:
        case PulseKind::squeeze_tone_b_minus:
          add(kI * half * phase, sp_ad_, SparseMatrixXc(sp_ad_.adjoint()));
          break;
        case PulseKind::rsb2:
          add(-half * phase, sp_a2_, SparseMatrixXc(sp_a2_.adjoint()));
          break;
        default:
          break;
      }
    }
    if (!any) return;
    out.noalias() -= kI * (h * rho);
    out.noalias() += kI * (rho * h);
  }

  const PulseSchedule& s_;
  TrotterOptions o_;
  int n_;
  SparseMatrixXc a_, ad_, a2_, ad2_, sp_a_, sp_ad_, sp_a2_;
  std::unique_ptr<LindbladGenerator> static_;
  Rk4<MatrixXc> rk_;
  MatrixXc m_;
};

}  // namespace

const char* to_string(PulseKind kind) {
  switch (kind) {
    case PulseKind::bsb1: return "bsb1";
    case PulseKind::rsb1: return "rsb1";
    case PulseKind::rsb2: return "rsb2";
    case PulseKind::squeeze_tone_r_plus: return "squeeze_tone_r_plus";
    case PulseKind::squeeze_tone_r_minus: return "squeeze_tone_r_minus";
    case PulseKind::squeeze_tone_b_plus: return "squeeze_tone_b_plus";
    case PulseKind::squeeze_tone_b_minus: return "squeeze_tone_b_minus";
    case PulseKind::spin_reset: return "spin_reset";
    case PulseKind::idle: return "idle";
  }
  return "unknown";
}

bool is_laser(PulseKind kind) { return kind != PulseKind::spin_reset && kind != PulseKind::idle; }

void PulseSchedule::validate() const {
  trunc.validate();
  if (!(eta > 0.0 && eta < 1.0)) throw ScheduleError("PulseSchedule: eta must lie in (0, 1)");
  if (!(omega_z > 0.0)) throw ScheduleError("PulseSchedule: omega_z must be > 0");
  if (n_cycles < 0) throw ScheduleError("PulseSchedule: n_cycles must be >= 0");
  if (!(gamma_h >= 0.0)) throw ScheduleError("PulseSchedule: gamma_h must be >= 0");
  if (n_cycles > 0 && !(cycle_period > 0.0)) throw ScheduleError("PulseSchedule: cycle_period must be > 0");
  for (std::size_t i = 0; i < pulses.size(); ++i) {
    const Pulse& p = pulses[i];
    if (!(p.duration >= 0.0))
      throw ScheduleError("PulseSchedule: pulse " + std::to_string(i) + " has negative duration");
    if (p.concurrent) {
      if (i == 0) throw ScheduleError("PulseSchedule: first pulse cannot be concurrent");
      if (p.duration != pulses[i - 1].duration)
        throw ScheduleError("PulseSchedule: concurrent pulse " + std::to_string(i) + " must match the duration of " +
                            "the pulse it joins");
      if (p.kind == PulseKind::spin_reset || pulses[i - 1].kind == PulseKind::spin_reset)
        throw ScheduleError("PulseSchedule: spin_reset cannot run concurrently");
    }
  }
  if (busy_time() > cycle_period * (1.0 + 1e-12) + 1e-15)
    throw ScheduleError("PulseSchedule: pulse durations " + std::to_string(busy_time()) + " s exceed cycle period " +
                        std::to_string(cycle_period) + " s");
}

double PulseSchedule::busy_time() const {
  double t = 0.0;
  for (const auto& p : pulses)
    if (!p.concurrent) t += p.duration;
  return t;
}

EffectiveRates effective_rates(const PulseSchedule& schedule) {
  EffectiveRates r;
  if (schedule.squeeze) r.omega2_eff = schedule.squeeze->omega2;
  if (!(schedule.cycle_period > 0.0)) return r;
  const double t = schedule.cycle_period;
  for (const auto& p : schedule.pulses) {
    const double g = 0.25 * p.rabi * p.rabi * p.duration * p.duration / t;
    switch (p.kind) {
      case PulseKind::bsb1: r.gamma1_plus += g; break;
      case PulseKind::rsb1: r.gamma1_minus += g; break;
      case PulseKind::rsb2: r.gamma2 += g; break;
      case PulseKind::squeeze_tone_r_plus: r.omega2_eff += std::abs(p.rabi) * p.duration / t; break;
      default: break;
    }
  }
  return r;
}

double rabi_for_rate(double gamma, double tau, double period) {
  if (!(gamma > 0.0) || !(tau > 0.0)) return 0.0;
  return 2.0 / tau * std::sqrt(gamma * period);
}

VdpParams equivalent_params(const PulseSchedule& schedule) {
  const EffectiveRates r = effective_rates(schedule);
  VdpParams p;
  p.gamma1_plus = r.gamma1_plus;
  p.gamma1_minus = r.gamma1_minus;
  p.gamma2 = r.gamma2;
  p.gamma_h = schedule.gamma_h;
  p.omega2 = r.omega2_eff;
  p.theta = schedule.squeeze ? schedule.squeeze->theta : 0.0;
  if (schedule.drive) {
    p.omega = schedule.drive->omega;
    p.delta = schedule.drive->detuning;
    p.drive_phase = schedule.drive->phase;
  }
  p.delta -= schedule.trap_offset;
  p.trunc = schedule.trunc;
  return p;
}

PulseSchedule scale_schedule(const PulseSchedule& schedule, double factor) {
  if (!(factor > 0.0)) throw ScheduleError("scale_schedule: factor must be > 0");
  PulseSchedule out = schedule;
  out.cycle_period *= factor;
  const double cycles = schedule.n_cycles / factor;
  out.n_cycles = static_cast<int>(std::lround(cycles));
  if (std::abs(cycles - out.n_cycles) > 1e-9)
    throw ScheduleError("scale_schedule: n_cycles / factor is not an integer");
  for (auto& p : out.pulses) {
    p.duration *= factor;
    const bool tone = p.kind == PulseKind::squeeze_tone_r_plus || p.kind == PulseKind::squeeze_tone_r_minus ||
                      p.kind == PulseKind::squeeze_tone_b_plus || p.kind == PulseKind::squeeze_tone_b_minus;
    if (!tone) p.rabi /= std::sqrt(factor);
  }
  return out;
}

const MatrixXc& lamb_dicke_exponential(double eta, int n_levels) {
  static std::mutex mutex;
  static std::map<std::pair<double, int>, MatrixXc> cache;
  std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_pair(eta, n_levels);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const MatrixXc a = annihilation_matrix(n_levels);
  const MatrixXc x = eta * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(x);
  const VectorXc phases = (kI * es.eigenvalues().cast<Complex>()).array().exp().matrix();
  MatrixXc e = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  return cache.emplace(key, std::move(e)).first->second;
}

Operator sideband_hamiltonian(const Pulse& pulse, double eta, double omega_z, double time,
                              const FockTruncation& trunc, double squeeze_offset) {
  trunc.validate();
  if (!is_laser(pulse.kind))
    throw ScheduleError(std::string("sideband_hamiltonian: pulse kind ") + to_string(pulse.kind) + " is not a laser");
  const int n = trunc.n_levels();
  MatrixXc m;
  laser_block(pulse, eta, omega_z, time, full_detuning(pulse, omega_z, squeeze_offset), n, m);
  MatrixXc h = MatrixXc::Zero(2 * n, 2 * n);
  h.bottomLeftCorner(n, n) = m;
  h.topRightCorner(n, n) = m.adjoint();
  return {std::move(h), trunc.spin_phonon()};
}

Operator rotating_wave_hamiltonian(const Pulse& pulse, double time, const FockTruncation& trunc) {
  trunc.validate();
  const auto ops = ladder_ops(trunc);
  MatrixXc phonon;
  Complex c = std::polar(0.5 * pulse.rabi, -(pulse.detuning * time + pulse.phase));
  switch (pulse.kind) {
    case PulseKind::rsb1: phonon = ops.a.matrix(); c *= kI; break;
    case PulseKind::bsb1: phonon = ops.a_dagger.matrix(); c *= kI; break;
    case PulseKind::rsb2: phonon = ops.a.matrix() * ops.a.matrix(); c *= -1.0; break;
    default:
      throw ScheduleError(std::string("rotating_wave_hamiltonian: no resonant form for ") + to_string(pulse.kind));
  }
  const MatrixXc coupling = c * kron(spin::sigma_plus(), phonon);
  return {coupling + coupling.adjoint(), trunc.spin_phonon()};
}

MatrixXc spin_reset(const MatrixXc& rho_joint, int n_levels) {
  MatrixXc out = MatrixXc::Zero(rho_joint.rows(), rho_joint.cols());
  out.topLeftCorner(n_levels, n_levels) = partial_trace_spin<double>(rho_joint, n_levels);
  return out;
}

DensityMatrix spin_reset(const DensityMatrix& rho_joint) {
  if (rho_joint.tag().space != Space::spin_phonon)
    throw DimensionError("spin_reset: expected a spin_phonon state, got " + to_string(rho_joint.tag()));
  return {spin_reset(rho_joint.matrix(), rho_joint.tag().n_levels), rho_joint.tag(), rho_joint.tolerances()};
}

double resonance_correction(const Pulse& pulse, double eta, double omega_z, const FockTruncation& trunc,
                            int period_substeps) {
  static std::mutex mutex;
  static std::map<PropagatorKey, double> cache;
  const int n = trunc.n_levels();
  const PropagatorKey key{static_cast<int>(pulse.kind), pulse.rabi, pulse.phase, 0.0, eta, omega_z, n,
                          period_substeps};
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const auto [lower, upper] = resonant_pair(pulse.kind, n);
  const double period = kTwoPi / omega_z;
  double nu = 0.0;
  for (int iter = 0; iter < 4; ++iter) {
    const MatrixXc u = period_propagator(pulse, eta, omega_z, n, nu, period_substeps);
    Eigen::ComplexEigenSolver<MatrixXc> es(u);
    const VectorXc logs = es.eigenvalues().array().log().matrix();
    const MatrixXc& v = es.eigenvectors();
    const MatrixXc h_eff = (kI / period) * (v * logs.asDiagonal() * v.inverse());
    const double gap = std::real(h_eff(upper, upper) - h_eff(lower, lower));
    nu += gap;
    if (std::abs(gap) < 1e-9 * std::abs(pulse.rabi) + 1e-12) break;
  }
  std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(key, nu);
  return nu;
}

Trajectory run_schedule(const DensityMatrix& rho0_phonon, const PulseSchedule& schedule,
                        const TrotterOptions& options) {
  schedule.validate();
  if (!(options.dt > 0.0)) throw ScheduleError("run_schedule: dt must be > 0");
  if (options.period_substeps < 8) throw ScheduleError("run_schedule: period_substeps must be >= 8");
  if (!(rho0_phonon.tag() == schedule.trunc.phonon()))
    throw DimensionError("run_schedule: initial state " + to_string(rho0_phonon.tag()) + " vs schedule " +
                         to_string(schedule.trunc.phonon()));
  const int n = schedule.trunc.n_levels();
  const SpaceTag phonon = schedule.trunc.phonon();
  const double delta = schedule.drive ? schedule.drive->detuning : 0.0;

  Trajectory traj;
  traj.params = equivalent_params(schedule);
  traj.times.push_back(0.0);
  traj.states.push_back(rho0_phonon);

  // consecutive pulses joined by `concurrent` form one window
  std::vector<std::vector<Pulse>> windows;
  for (const auto& p : schedule.pulses) {
    if (p.concurrent && !windows.empty())
      windows.back().push_back(p);
    else
      windows.push_back({p});
  }

  MatrixXc rho = kron(spin::down_projector(), rho0_phonon.matrix());
  Engine engine(schedule, options);
  for (int cycle = 0; cycle < schedule.n_cycles; ++cycle) {
    const double start = cycle * schedule.cycle_period;
    double t = start;
    for (const auto& group : windows) {
      const double duration = group.front().duration;
      if (group.front().kind == PulseKind::spin_reset) rho = spin_reset(rho, n);
      engine.run_window(rho, t, duration, group);
      t += duration;
    }
    const double end = start + schedule.cycle_period;
    if (end - t > 1e-15) engine.run_window(rho, t, end - t, {});

    MatrixXc reduced = partial_trace_spin<double>(rho, n);
    reduced = hermitized<double>(rotate_phase<double>(reduced, phonon, delta * end));
    const double drift = std::abs(reduced.trace() - Complex(1.0));
    if (drift > kTrotterTraceDrift)
      throw TraceDriftError("run_schedule: |Tr rho - 1| = " + std::to_string(drift) + " after cycle " +
                            std::to_string(cycle + 1) + "; reduce dt");
    const double tail = tail_population<double>(reduced, phonon);
    if (tail > schedule.trunc.tail_tolerance)
      throw TruncationError("run_schedule: top-two-level population " + std::to_string(tail) + " after cycle " +
                            std::to_string(cycle + 1) + "; raise n_max");
    traj.times.push_back(end);
    traj.states.emplace_back(std::move(reduced), phonon, kEvolvedTolerances);
  }
  return traj;
}

}  // namespace qvdp
