#include "qvdp/experiments/presets.hpp"

#include <string>
#include <utility>

namespace qvdp::experiments {

namespace {

// Rates in kHz, drives in Hz over 2 pi, pulse times in microseconds. Every driven preset points
// the drive along pi/2 in phase space.
const std::vector<std::pair<std::string_view, std::string_view>>& presets() {
  static const std::vector<std::pair<std::string_view, std::string_view>> table{
      {"fig2", R"json({
  "scenario": "limit_cycle",
  "params": {"gamma1_plus_khz": 2.06, "gamma1_minus_khz": 0.09, "gamma_h_khz": 0.09, "gamma2_khz": 1.11,
             "omega_hz_over_2pi": 0, "omega2_hz_over_2pi": 0, "delta_hz_over_2pi": 0},
  "timing": {"tau_bsb_us": 40, "tau_rsb_us": 0, "tau_2rsb_us": 150, "tau_sq_us": 0, "tau_reset_us": 10,
             "tau_idle_us": 0, "period_us": 200, "n_cycles": 20},
  "initial_state": {"kind": "displaced_thermal", "nbar": 1.5, "alpha_re": 1, "alpha_im": 0},
  "sample_times_us": [0, 600, 2000, 4000]
})json"},
      {"fig3a", R"json({
  "scenario": "entrainment",
  "params": {"gamma1_plus_khz": 0.28, "gamma1_minus_khz": 0.12, "gamma_h_khz": 0.12, "gamma2_khz": 1.48,
             "omega_hz_over_2pi": 160, "omega2_hz_over_2pi": 0, "delta_hz_over_2pi": 0,
             "drive_phase_rad": 1.5707963267948966},
  "timing": {"tau_bsb_us": 10, "tau_rsb_us": 0, "tau_2rsb_us": 120, "tau_sq_us": 0, "tau_reset_us": 10,
             "tau_idle_us": 10, "period_us": 150, "n_cycles": 22},
  "initial_state": {"kind": "coherent", "alpha_re": 0, "alpha_im": 0},
  "sweep": [{"name": "alpha_im", "values": [0, 0.5, 1]}],
  "sample_times_us": [0, 300, 600, 900, 1200, 1500, 1800, 2100, 2400, 2700, 3000, 3300]
})json"},
      {"fig3b", R"json({
  "scenario": "phase_locking",
  "params": {"gamma1_plus_khz": 0.23, "gamma1_minus_khz": 0.09, "gamma_h_khz": 0.09, "gamma2_khz": 1.31,
             "omega_hz_over_2pi": 173, "omega2_hz_over_2pi": 0, "delta_hz_over_2pi": 0,
             "drive_phase_rad": 1.5707963267948966},
  "timing": {"tau_bsb_us": 10, "tau_rsb_us": 0, "tau_2rsb_us": 150, "tau_sq_us": 0, "tau_reset_us": 10,
             "tau_idle_us": 0, "period_us": 170, "n_cycles": 24},
  "initial_state": {"kind": "coherent", "alpha_re": -1, "alpha_im": 0},
  "sample_times_us": [0, 340, 510, 680, 1020, 1530, 2040, 2550, 3060, 3400, 3740, 4080]
})json"},
      {"fig3c", R"json({
  "scenario": "phase_distribution",
  "params": {"gamma1_plus_khz": 0.23, "gamma1_minus_khz": 0.09, "gamma_h_khz": 0.09, "gamma2_khz": 1.31,
             "omega2_hz_over_2pi": 0, "delta_hz_over_2pi": 0, "drive_phase_rad": 1.5707963267948966},
  "timing": {"tau_bsb_us": 10, "tau_rsb_us": 0, "tau_2rsb_us": 150, "tau_sq_us": 0, "tau_reset_us": 10,
             "tau_idle_us": 0, "period_us": 170, "n_cycles": 20},
  "initial_state": {"kind": "vacuum"},
  "sweep": [{"name": "omega", "values_hz_over_2pi": [0, 17, 43, 87, 130, 173]}],
  "steady": true
})json"},
      {"fig3d", R"json({
  "scenario": "arnold_tongue",
  "params": {"gamma1_plus_khz": 0.28, "gamma1_minus_khz": 0.12, "gamma_h_khz": 0.12, "gamma2_khz": 1.48,
             "omega2_hz_over_2pi": 0, "drive_phase_rad": 1.5707963267948966},
  "timing": {"tau_bsb_us": 10, "tau_rsb_us": 0, "tau_2rsb_us": 120, "tau_sq_us": 0, "tau_reset_us": 10,
             "tau_idle_us": 10, "period_us": 150, "n_cycles": 48},
  "initial_state": {"kind": "vacuum"},
  "sweep": [{"name": "omega", "values_hz_over_2pi": [45, 91, 136, 181]},
            {"name": "delta", "values_hz_over_2pi": [-272, -136, 0, 136, 272]}],
  "steady": true
})json"},
      {"fig4a_quantum", R"json({
  "scenario": "dissipation_boost",
  "params": {"gamma1_plus_khz": 0.16, "gamma_h_khz": 0.12, "gamma2_khz": 0.22,
             "omega_hz_over_2pi": 76, "omega2_hz_over_2pi": 0, "delta_hz_over_2pi": 0,
             "drive_phase_rad": 1.5707963267948966},
  "timing": {"tau_bsb_us": 5, "tau_rsb_us": 10, "tau_2rsb_us": 50, "tau_sq_us": 0, "tau_reset_us": 15,
             "tau_idle_us": 80, "period_us": 160, "n_cycles": 37},
  "initial_state": {"kind": "vacuum"},
  "sweep": [{"name": "gamma1_minus", "values_khz": [0.12, 0.27, 0.74, 1.33, 2.12]}],
  "steady": true
})json"},
      {"fig4a_deep", R"json({
  "scenario": "dissipation_boost",
  "params": {"gamma1_plus_khz": 0.16, "gamma_h_khz": 0.12, "gamma2_khz": 1.25,
             "omega_hz_over_2pi": 76, "omega2_hz_over_2pi": 0, "delta_hz_over_2pi": 0,
             "drive_phase_rad": 1.5707963267948966},
  "timing": {"tau_bsb_us": 5, "tau_rsb_us": 10, "tau_2rsb_us": 120, "tau_sq_us": 0, "tau_reset_us": 15,
             "tau_idle_us": 10, "period_us": 160, "n_cycles": 37},
  "initial_state": {"kind": "vacuum"},
  "sweep": [{"name": "gamma1_minus", "values_khz": [0.12, 0.27, 0.74, 1.33, 2.12]}],
  "steady": true
})json"},
      {"fig4a_semiclassical", R"json({
  "scenario": "dissipation_boost",
  "params": {"gamma1_plus_khz": 0.16, "gamma_h_khz": 0.12, "gamma2_khz": 0.0096,
             "omega_hz_over_2pi": 76, "omega2_hz_over_2pi": 0, "delta_hz_over_2pi": 0,
             "drive_phase_rad": 1.5707963267948966, "n_max": 120},
  "initial_state": {"kind": "vacuum"},
  "sweep": [{"name": "gamma1_minus", "values_khz": [0.12, 0.27, 0.74, 1.33, 2.12]}],
  "steady": true,
  "grid": {"r_max": 8, "n_r": 120, "n_phi": 120},
  "notes": ["n_max = 120: each steady state factors a 14641 x 14641 sparse superoperator (about 0.2 GB peak)",
            "gamma2 / gamma1_plus = 0.06; no pulse timing, exact engine only"]
})json"},
      {"fig4bc", R"json({
  "scenario": "squeezing_scan",
  "params": {"gamma1_plus_khz": 0.23, "gamma1_minus_khz": 0.12, "gamma_h_khz": 0.12, "gamma2_khz": 1.01,
             "omega_hz_over_2pi": 43, "delta_hz_over_2pi": 0, "drive_phase_rad": 1.5707963267948966},
  "timing": {"tau_bsb_us": 10, "tau_rsb_us": 0, "tau_2rsb_us": 150, "tau_sq_us": 35, "tau_reset_us": 15,
             "tau_idle_us": 10, "period_us": 220, "n_cycles": 20},
  "initial_state": {"kind": "vacuum"},
  "sweep": [{"name": "omega2", "values_hz_over_2pi": [0, 32, 63]},
            {"name": "theta", "values_rad": [0, 1.5707963267948966]}],
  "steady": true,
  "notes": ["theta = 0 squeezes perpendicular to the drive, theta = pi/2 parallel"]
})json"},
      {"figS2", R"json({
  "scenario": "dissipation_boost",
  "params": {"gamma1_plus_khz": 0.16, "gamma_h_khz": 0.12,
             "omega_hz_over_2pi": 76, "omega2_hz_over_2pi": 0, "delta_hz_over_2pi": 0,
             "drive_phase_rad": 1.5707963267948966},
  "initial_state": {"kind": "vacuum"},
  "sweep": [{"name": "gamma2", "values_khz": [0.22, 1.25]},
            {"name": "gamma1_minus", "values_khz": [0.12, 0.27, 0.74, 1.33, 2.12]}],
  "steady": true,
  "notes": ["gamma2 = 0.22 kHz is the quantum regime, 1.25 kHz the deep quantum regime",
            "the two regimes use different pulse timings, so this preset is exact engine only"]
})json"},
  };
  return table;
}

}  // namespace

std::vector<std::string_view> preset_names() {
  std::vector<std::string_view> out;
  for (const auto& [name, doc] : presets()) out.push_back(name);
  return out;
}

std::optional<std::string_view> preset_document(std::string_view name) {
  for (const auto& [n, doc] : presets())
    if (n == name) return doc;
  return std::nullopt;
}

ExperimentConfig preset_config(std::string_view name) {
  return load_config(R"({"preset": ")" + std::string(name) + R"("})");
}

}  // namespace qvdp::experiments
