#pragma once

// Pulse-level emulation of the reservoir-engineered oscillator on spin (x) phonon.
//
// Frames: the phonon is in the interaction picture of omega_z n (laser sidebands keep their
// explicit time dependence), the spin in the picture of its own splitting. Recorded phonon
// states are additionally rotated into the continuous-drive frame, exp(i Delta t n), so they
// compare directly with lindblad::evolve.

#include <numbers>
#include <optional>
#include <vector>

#include "qvdp/fock.hpp"
#include "qvdp/lindblad.hpp"

namespace qvdp {

enum class PulseKind {
  bsb1,
  rsb1,
  rsb2,
  squeeze_tone_r_plus,
  squeeze_tone_r_minus,
  squeeze_tone_b_plus,
  squeeze_tone_b_minus,
  spin_reset,
  idle,
};

const char* to_string(PulseKind kind);
bool is_laser(PulseKind kind);

struct Pulse {
  PulseKind kind = PulseKind::idle;
  double rabi = 0.0;       // rad/s
  double detuning = 0.0;   // rad/s, relative to the ideal sideband resonance
  double phase = 0.0;      // rad
  double duration = 0.0;   // s
  bool concurrent = false; // starts together with the previous pulse (same duration required)
};

/// H_dis in the phonon interaction frame: i omega (a^dag e^{i phase} e^{-i detuning t} - h.c.).
/// phase is the drive_phase of the equivalent VdpParams (phi_dis = -phase).
struct ContinuousDrive {
  double omega = 0.0;
  double detuning = 0.0;
  double phase = 0.0;
};

/// Squeezing applied as its time-averaged effective term instead of four laser tones.
struct EffectiveSqueeze {
  double omega2 = 0.0;
  double theta = 0.0;
};

inline constexpr double kDefaultEta = 0.0925;
inline constexpr double kDefaultOmegaZ = 2.0 * std::numbers::pi * 1.1e6;

struct PulseSchedule {
  std::vector<Pulse> pulses;  // one cycle; the time left to cycle_period is idle
  double cycle_period = 0.0;  // s
  int n_cycles = 0;
  std::optional<ContinuousDrive> drive;
  std::optional<EffectiveSqueeze> squeeze;
  double eta = kDefaultEta;
  double omega_z = kDefaultOmegaZ;
  double gamma_h = 0.0;         // 1/s, applied during the whole cycle
  double squeeze_offset = 0.0;  // delta_m of the squeeze tones, rad/s
  double trap_offset = 0.0;     // trap-frequency error, rad/s; adds trap_offset n
  FockTruncation trunc{};

  void validate() const;
  double busy_time() const;
  double duration() const { return cycle_period * n_cycles; }
};

struct EffectiveRates {
  double gamma1_plus = 0.0;
  double gamma1_minus = 0.0;
  double gamma2 = 0.0;
  double omega2_eff = 0.0;
};

/// gamma = (rabi/2)^2 tau^2 / T per sideband channel; omega2 = rabi tau / T per squeeze set.
EffectiveRates effective_rates(const PulseSchedule& schedule);

/// Inverse of the rate formula: rabi = (2 / tau) sqrt(gamma T). Zero for tau = 0 or gamma = 0.
double rabi_for_rate(double gamma, double tau, double period);

/// VdpParams the schedule emulates: effective rates, gamma_h, the drive and the effective squeeze.
VdpParams equivalent_params(const PulseSchedule& schedule);

/// Same schedule with tau and T scaled by factor, rabi by 1/sqrt(factor) (squeeze rabi kept),
/// and the cycle count scaled by 1/factor, so rates and total time are unchanged.
PulseSchedule scale_schedule(const PulseSchedule& schedule, double factor);

/// Cached exp(i eta (a + a^dag)) on n_levels Fock levels.
const MatrixXc& lamb_dicke_exponential(double eta, int n_levels);

/// Full sideband Hamiltonian on spin (x) phonon at lab time t, phonon in the omega_z frame.
Operator sideband_hamiltonian(const Pulse& pulse, double eta, double omega_z, double time,
                              const FockTruncation& trunc, double squeeze_offset = 0.0);

/// Resonant Lamb-Dicke coupling of a first- or second-order sideband, with pulse detuning
/// nu and phase phi: (rabi/2)(i s+ a, i s+ a^dag, -s+ a^2) e^{-i(nu t + phi)} + h.c.
Operator rotating_wave_hamiltonian(const Pulse& pulse, double time, const FockTruncation& trunc);

/// |down><down| (x) Tr_spin rho.
DensityMatrix spin_reset(const DensityMatrix& rho_joint);
MatrixXc spin_reset(const MatrixXc& rho_joint, int n_levels);

enum class FidelityMode { rotating_wave, full };

struct TrotterOptions {
  FidelityMode mode = FidelityMode::rotating_wave;
  double dt = 1e-6;                 // step for windows without full-Hamiltonian laser terms
  int period_substeps = 512;        // RK4 substeps per trap period in full mode
  bool calibrate_resonance = true;  // full mode: cancel the lowest-manifold AC-Stark shift
};

inline constexpr double kTrotterTraceDrift = 1e-5;

/// Lifts rho0 to |down><down| (x) rho0 and runs the schedule. The trajectory holds the reduced
/// phonon state at every cycle boundary (times k T). Throws TraceDriftError, TruncationError,
/// ScheduleError.
Trajectory run_schedule(const DensityMatrix& rho0_phonon, const PulseSchedule& schedule,
                        const TrotterOptions& options = {});

/// Spin-frame detuning that puts a sideband on resonance with its lowest manifold in full mode
/// (|down,1>-|up,0> for rsb1, |down,0>-|up,1> for bsb1, |down,2>-|up,0> for rsb2).
double resonance_correction(const Pulse& pulse, double eta, double omega_z, const FockTruncation& trunc,
                            int period_substeps = 512);

}  // namespace qvdp
