#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qvdp/experiments/units.hpp"
#include "qvdp/lindblad.hpp"
#include "qvdp/tomography.hpp"
#include "qvdp/trotter.hpp"

namespace qvdp::experiments {

enum class Scenario {
  limit_cycle,
  entrainment,
  phase_locking,
  phase_distribution,
  arnold_tongue,
  dissipation_boost,
  squeezing_scan,
  custom,
};

enum class EngineKind { exact, trotter_rwa, trotter_full };

std::string_view to_string(Scenario s);
std::string_view to_string(EngineKind e);
std::optional<Scenario> parse_scenario(std::string_view s);
std::optional<EngineKind> parse_engine(std::string_view s);

struct InitialState {
  enum class Kind { vacuum, coherent, displaced_thermal };
  Kind kind = Kind::vacuum;
  Complex alpha{};
  double nbar = 0.0;

  DensityMatrix build(const FockTruncation& trunc, Flags* flags = nullptr) const;
};

/// Pulse times of one Trotter cycle (seconds). A zero time means the channel is absent.
struct PulseTiming {
  double tau_bsb = 0.0;
  double tau_rsb = 0.0;
  double tau_2rsb = 0.0;
  double tau_sq = 0.0;
  double tau_reset = 0.0;
  double tau_idle = 0.0;
  double period = 0.0;
  int n_cycles = 0;  // cycles for steady-state rows of the Trotter engines
  double eta = kDefaultEta;
  double omega_z = kDefaultOmegaZ;
  double trap_offset = 0.0;

  bool defined() const { return period > 0.0; }
};

/// Builds the Trotter program for params: sideband Rabi rates from the effective-rate inversion,
/// zero-duration spin resets after the pumping and one-phonon-loss pulses, the closing reset of
/// tau_reset, squeezing as its effective term, and the drive on continuously.
PulseSchedule build_schedule(const VdpParams& params, const PulseTiming& timing, int n_cycles,
                             Flags* flags = nullptr);

struct SweepAxis {
  std::string name;            // a parameter name from parameter_registry()
  std::vector<double> values;  // SI
};

struct OutputSpec {
  std::string csv = "results.csv";
  bool wigner = false;
};

struct ExperimentConfig {
  std::string name;
  std::optional<std::string> preset;
  Scenario scenario = Scenario::custom;
  EngineKind engine = EngineKind::exact;
  VdpParams params;
  PulseTiming timing;
  InitialState initial;
  std::vector<SweepAxis> sweep;      // at most two axes; the first varies slowest
  std::vector<double> sample_times;  // seconds; empty when steady
  bool steady = false;
  double dt = kDefaultDt;
  GridSpec grid;
  OutputSpec output;
  std::vector<std::string> notes;

  std::size_t n_points() const;
};

struct ParamInfo {
  std::string_view name;
  Dimension dimension;
  std::string_view description;
};

/// Parameters that may be set under "params" or swept.
const std::vector<ParamInfo>& parameter_registry();
const ParamInfo* find_parameter(std::string_view name);

/// Applies one SI value to the point setup. Throws ConfigError for unknown names.
void apply_parameter(std::string_view name, double value_si, VdpParams& params, InitialState& initial);
double read_parameter(std::string_view name, const VdpParams& params, const InitialState& initial);

/// Parses a JSON document, expands the named preset and validates everything. Throws ConfigError.
ExperimentConfig load_config(std::string_view text);
ExperimentConfig load_config_file(const std::string& path);

/// Human-readable listing of a resolved config with units.
std::string describe(const ExperimentConfig& config);

}  // namespace qvdp::experiments
