#include <cmath>
#include <numbers>

#include "qvdp/experiments/config.hpp"

namespace qvdp::experiments {

const std::vector<UnitSuffix>& unit_suffixes() {
  static const std::vector<UnitSuffix> table{
      {"_khz", Dimension::rate, 1e3},
      {"_per_s", Dimension::rate, 1.0},
      {"_hz_over_2pi", Dimension::angular, 2.0 * std::numbers::pi},
      {"_per_s", Dimension::angular, 1.0},
      {"_us", Dimension::time, 1e-6},
      {"_rad", Dimension::angle, 1.0},
  };
  return table;
}

SplitKey split_unit_suffix(std::string_view key) {
  for (const auto& u : unit_suffixes())
    if (key.size() > u.suffix.size() && key.substr(key.size() - u.suffix.size()) == u.suffix)
      return {std::string(key.substr(0, key.size() - u.suffix.size())), u.suffix};
  return {std::string(key), {}};
}

std::optional<double> si_factor(std::string_view suffix, Dimension dimension) {
  if (dimension == Dimension::dimensionless) return suffix.empty() ? std::optional<double>(1.0) : std::nullopt;
  for (const auto& u : unit_suffixes())
    if (u.suffix == suffix && u.dimension == dimension) return u.to_si;
  return std::nullopt;
}

std::string accepted_suffixes(Dimension dimension) {
  if (dimension == Dimension::dimensionless) return "no suffix";
  std::string out;
  for (const auto& u : unit_suffixes())
    if (u.dimension == dimension) out += (out.empty() ? "" : " or ") + std::string(u.suffix);
  return out;
}

std::string_view si_label(Dimension dimension) {
  switch (dimension) {
    case Dimension::rate: return "per_s";
    case Dimension::angular: return "rad_per_s";
    case Dimension::time: return "s";
    case Dimension::angle: return "rad";
    case Dimension::dimensionless: return "";
  }
  return "";
}

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::limit_cycle: return "limit_cycle";
    case Scenario::entrainment: return "entrainment";
    case Scenario::phase_locking: return "phase_locking";
    case Scenario::phase_distribution: return "phase_distribution";
    case Scenario::arnold_tongue: return "arnold_tongue";
    case Scenario::dissipation_boost: return "dissipation_boost";
    case Scenario::squeezing_scan: return "squeezing_scan";
    case Scenario::custom: return "custom";
  }
  return "custom";
}

std::string_view to_string(EngineKind e) {
  switch (e) {
    case EngineKind::exact: return "exact";
    case EngineKind::trotter_rwa: return "trotter_rwa";
    case EngineKind::trotter_full: return "trotter_full";
  }
  return "exact";
}

std::optional<Scenario> parse_scenario(std::string_view s) {
  for (Scenario v : {Scenario::limit_cycle, Scenario::entrainment, Scenario::phase_locking,
                     Scenario::phase_distribution, Scenario::arnold_tongue, Scenario::dissipation_boost,
                     Scenario::squeezing_scan, Scenario::custom})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::optional<EngineKind> parse_engine(std::string_view s) {
  for (EngineKind v : {EngineKind::exact, EngineKind::trotter_rwa, EngineKind::trotter_full})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

const std::vector<ParamInfo>& parameter_registry() {
  static const std::vector<ParamInfo> table{
      {"delta", Dimension::angular, "detuning of the drive"},
      {"omega", Dimension::angular, "drive amplitude"},
      {"omega2", Dimension::angular, "squeezing amplitude"},
      {"theta", Dimension::angle, "squeezing phase relative to the drive"},
      {"drive_phase", Dimension::angle, "phase-space direction of the drive"},
      {"gamma1_plus", Dimension::rate, "one-phonon pumping"},
      {"gamma1_minus", Dimension::rate, "one-phonon loss"},
      {"gamma2", Dimension::rate, "two-phonon loss"},
      {"gamma_h", Dimension::rate, "motional heating, applied as D[a] and D[a^dag]"},
      {"n_max", Dimension::dimensionless, "highest retained Fock level"},
      {"alpha_re", Dimension::dimensionless, "initial displacement, real part"},
      {"alpha_im", Dimension::dimensionless, "initial displacement, imaginary part"},
      {"nbar", Dimension::dimensionless, "initial thermal occupation"},
  };
  return table;
}

const ParamInfo* find_parameter(std::string_view name) {
  for (const auto& p : parameter_registry())
    if (p.name == name) return &p;
  return nullptr;
}

void apply_parameter(std::string_view name, double v, VdpParams& p, InitialState& init) {
  if (name == "delta") p.delta = v;
  else if (name == "omega") p.omega = v;
  else if (name == "omega2") p.omega2 = v;
  else if (name == "theta") p.theta = v;
  else if (name == "drive_phase") p.drive_phase = v;
  else if (name == "gamma1_plus") p.gamma1_plus = v;
  else if (name == "gamma1_minus") p.gamma1_minus = v;
  else if (name == "gamma2") p.gamma2 = v;
  else if (name == "gamma_h") p.gamma_h = v;
  else if (name == "n_max") {
    if (v != std::floor(v) || v < 2) throw ConfigError("n_max must be an integer >= 2");
    p.trunc.n_max = static_cast<int>(v);
  } else if (name == "alpha_re") init.alpha.real(v);
  else if (name == "alpha_im") init.alpha.imag(v);
  else if (name == "nbar") init.nbar = v;
  else throw ConfigError("unknown parameter '" + std::string(name) + "'");
}

double read_parameter(std::string_view name, const VdpParams& p, const InitialState& init) {
  if (name == "delta") return p.delta;
  if (name == "omega") return p.omega;
  if (name == "omega2") return p.omega2;
  if (name == "theta") return p.theta;
  if (name == "drive_phase") return p.drive_phase;
  if (name == "gamma1_plus") return p.gamma1_plus;
  if (name == "gamma1_minus") return p.gamma1_minus;
  if (name == "gamma2") return p.gamma2;
  if (name == "gamma_h") return p.gamma_h;
  if (name == "n_max") return p.trunc.n_max;
  if (name == "alpha_re") return init.alpha.real();
  if (name == "alpha_im") return init.alpha.imag();
  if (name == "nbar") return init.nbar;
  throw ConfigError("unknown parameter '" + std::string(name) + "'");
}

DensityMatrix InitialState::build(const FockTruncation& trunc, Flags* flags) const {
  switch (kind) {
    case Kind::vacuum: return vacuum(trunc);
    case Kind::coherent: return coherent_state(trunc, alpha);
    case Kind::displaced_thermal: return displaced_thermal_state(trunc, nbar, alpha, flags);
  }
  return vacuum(trunc);
}

std::size_t ExperimentConfig::n_points() const {
  std::size_t n = 1;
  for (const auto& axis : sweep) n *= axis.values.size();
  return n;
}

PulseSchedule build_schedule(const VdpParams& params, const PulseTiming& timing, int n_cycles, Flags* flags) {
  if (!timing.defined()) throw ScheduleError("build_schedule: no pulse timing (period) for this configuration");
  PulseSchedule s;
  s.cycle_period = timing.period;
  s.n_cycles = n_cycles;
  s.eta = timing.eta;
  s.omega_z = timing.omega_z;
  s.trap_offset = timing.trap_offset;
  s.gamma_h = params.gamma_h;
  s.trunc = params.trunc;
  if (params.omega != 0.0 || params.delta != 0.0)
    s.drive = ContinuousDrive{params.omega, params.delta, params.drive_phase};
  if (params.omega2 != 0.0) s.squeeze = EffectiveSqueeze{params.omega2, params.theta};

  const auto channel = [&](PulseKind kind, double gamma, double tau, const char* name) {
    if (gamma > 0.0 && tau <= 0.0)
      raise_flag(flags, std::string("build_schedule: ") + name + " has no pulse time; the channel is dropped");
    if (tau <= 0.0) return;
    s.pulses.push_back({kind, rabi_for_rate(gamma, tau, timing.period), 0.0, 0.0, tau, false});
  };
  // the effective squeeze runs continuously, so its slot is idle at pulse level
  if (timing.tau_sq > 0.0) s.pulses.push_back({PulseKind::idle, 0.0, 0.0, 0.0, timing.tau_sq, false});
  channel(PulseKind::bsb1, params.gamma1_plus, timing.tau_bsb, "gamma1_plus");
  if (timing.tau_bsb > 0.0) s.pulses.push_back({PulseKind::spin_reset, 0.0, 0.0, 0.0, 0.0, false});
  channel(PulseKind::rsb1, params.gamma1_minus, timing.tau_rsb, "gamma1_minus");
  if (timing.tau_rsb > 0.0) s.pulses.push_back({PulseKind::spin_reset, 0.0, 0.0, 0.0, 0.0, false});
  channel(PulseKind::rsb2, params.gamma2, timing.tau_2rsb, "gamma2");
  s.pulses.push_back({PulseKind::spin_reset, 0.0, 0.0, 0.0, timing.tau_reset, false});
  if (timing.tau_idle > 0.0) s.pulses.push_back({PulseKind::idle, 0.0, 0.0, 0.0, timing.tau_idle, false});
  s.validate();
  return s;
}

}  // namespace qvdp::experiments
