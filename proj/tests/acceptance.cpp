// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when a criterion outside
// --expect-fail fails, or when a criterion listed there passes.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include "qvdp/experiments/presets.hpp"
#include "qvdp/experiments/runner.hpp"
#include "qvdp/lindblad.hpp"
#include "qvdp/tomography.hpp"
#include "qvdp/trotter.hpp"

using namespace qvdp;
using namespace qvdp::experiments;

namespace {

constexpr double kPi = std::numbers::pi;

// tolerances
constexpr double kLimitCycleMaxS = 0.05;
constexpr double kRingMin = 1.0, kRingMax = 1.7;
constexpr double kPhaseLockTolerance = 0.2;
constexpr double kPhaseLockMinS = 0.5;
constexpr double kMonotoneSlack = 1e-3;
constexpr double kSymmetryTolerance = 1e-6;
constexpr double kFixedPointTolerance = 1e-3;
constexpr double kFixedPointRatio = 1e4;
constexpr double kTrotterMaxDistance = 0.05;
constexpr int kTrotterNMax = 40;
constexpr double kDecayRelative = 0.01;
constexpr double kRatioRelative = 0.03;
// two lobes count as well separated when they lie further apart than the half-maximum width of a
// coherent-state lobe, W ~ exp(-2|beta|^2)
const double kLobeSeparation = std::sqrt(2.0 * std::log(2.0));
const GridSpec kLobeGrid{4.0, 161, 360};

// budgets, seconds
constexpr double kBudgetLimitCycle = 30, kBudgetPhaseLock = 30, kBudgetNarrowing = 60, kBudgetTongue = 120,
                 kBudgetBoost = 180, kBudgetSqueeze = 60, kBudgetTrotter = 120, kBudgetQuick = 30;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[violated] ";
    }
    detail << what << "; ";
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

const ResultRow& row_at(const ResultTable& t, const std::vector<double>& coords) {
  for (const auto& r : t.rows)
    if (r.coords == coords) return r;
  throw Error("no row for the requested sweep point");
}

void check_no_failures(Outcome& o, const ResultTable& t, const std::string& name) {
  o.require(t.failed_points == 0, name + " failed points " + std::to_string(t.failed_points));
}

void limit_cycle(Outcome& o) {
  const auto c = preset_config("fig2");
  const auto rho0 = c.initial.build(c.params.trunc);
  const auto traj = evolve(rho0, c.params, 4e-3, c.dt, {4e-3});
  const auto& rho = traj.states.back();
  const auto w = wigner_polar(rho, c.grid);
  const double s = sync_measure(phase_distribution(w)).s;
  const double r = ring_radius(w);
  const double rc = classical_limit_radius(c.params.gamma1_plus, c.params.gamma1_minus, c.params.gamma2);
  o.require(s <= kLimitCycleMaxS, "S(4 ms) = " + fmt(s));
  o.require(r >= kRingMin && r <= kRingMax, "ring radius " + fmt(r) + " (r_c/2 = " + fmt(rc / 2) + ")");
}

void phase_locking(Outcome& o) {
  const auto c = preset_config("fig3b");
  const auto t = run(c);
  check_no_failures(o, t, "fig3b");
  const auto& last = t.rows.back();
  o.require(last.mean_phase && std::abs(*last.mean_phase - kPi / 2) <= kPhaseLockTolerance,
            "phase at " + fmt(last.time * 1e3) + " ms = " + (last.mean_phase ? fmt(*last.mean_phase) : "none"));
  const auto ss = sync_measure(phase_distribution(wigner_polar(steady_state(c.params), c.grid)));
  o.require(ss.mean_phase && std::abs(*ss.mean_phase - kPi / 2) <= kPhaseLockTolerance,
            "steady phase " + (ss.mean_phase ? fmt(*ss.mean_phase) : "none"));
  o.require(ss.s >= kPhaseLockMinS, "steady S = " + fmt(ss.s));
}

void phase_narrowing(Outcome& o) {
  const auto c = preset_config("fig3c");
  const auto t = run(c);
  check_no_failures(o, t, "fig3c");
  std::string list;
  bool decreasing = true;
  double previous = 2.0;
  for (const auto& r : t.rows) {
    const double v = 1.0 - r.s;  // circular variance
    decreasing &= v < previous;
    previous = v;
    list += fmt(v, 3) + " ";
  }
  o.require(t.rows.size() == 6, std::to_string(t.rows.size()) + " drive values");
  o.require(decreasing, "circular variance " + list);
}

void arnold_tongue(Outcome& o) {
  const auto t = run(preset_config("fig3d"));
  check_no_failures(o, t, "fig3d");
  const auto sm = arnold_tongue_summary(t);
  const auto ni = sm.s.rows(), nj = sm.s.cols();
  const auto centre = static_cast<Eigen::Index>(
      std::find(sm.delta_axis.begin(), sm.delta_axis.end(), 0.0) - sm.delta_axis.begin());
  bool increasing = centre < nj;
  for (Eigen::Index i = 0; increasing && i + 1 < ni; ++i) increasing = sm.s(i + 1, centre) > sm.s(i, centre);
  bool falls_off = true;
  double asym = 0.0;
  for (Eigen::Index i = 0; i < ni; ++i)
    for (Eigen::Index j = 0; j < nj; ++j) {
      const Eigen::Index mirror = nj - 1 - j;
      asym = std::max(asym, std::abs(sm.s(i, j) - sm.s(i, mirror)));
      if (j < centre) falls_off &= sm.s(i, j) <= sm.s(i, j + 1) + kMonotoneSlack;
      if (j > centre) falls_off &= sm.s(i, j) <= sm.s(i, j - 1) + kMonotoneSlack;
    }
  o.require(increasing, "S at zero detuning increasing in omega: " + fmt(sm.s(0, centre)) + " .. " +
                            fmt(sm.s(ni - 1, centre)));
  o.require(falls_off, "S non-increasing in |delta|");
  o.require(asym <= kSymmetryTolerance, "max |S(delta) - S(-delta)| = " + fmt(asym, 2));
}

void dissipation_boost(Outcome& o) {
  const auto rates = [](const ResultTable& t) {
    std::vector<double> s;
    for (const auto& r : t.rows) s.push_back(r.s);
    return s;
  };
  const auto non_increasing = [](const std::vector<double>& s) {
    for (std::size_t k = 0; k + 1 < s.size(); ++k)
      if (s[k + 1] > s[k] + kMonotoneSlack) return false;
    return true;
  };
  const auto deep_t = run(preset_config("fig4a_deep"));
  const auto quantum_t = run(preset_config("fig4a_quantum"));
  const auto semi_t = run(preset_config("fig4a_semiclassical"));
  const auto s2 = run(preset_config("figS2"));
  for (const auto* t : {&deep_t, &quantum_t, &semi_t, &s2}) check_no_failures(o, *t, "sweep");
  const auto deep = rates(deep_t), quantum = rates(quantum_t), semi = rates(semi_t);
  const double best = *std::max_element(deep.begin(), deep.end());
  o.require(best > deep.front(), "deep max S " + fmt(best) + " vs baseline " + fmt(deep.front()));
  o.require(non_increasing(quantum), "quantum S " + fmt(quantum.front()) + " .. " + fmt(quantum.back()));
  o.require(non_increasing(semi), "semiclassical S " + fmt(semi.front()) + " .. " + fmt(semi.back()));
  const auto& axis = preset_config("figS2").sweep;
  bool stronger = true;
  for (double g1m : axis[1].values)
    stronger &= row_at(s2, {axis[0].values[0], g1m}).s > row_at(s2, {axis[0].values[1], g1m}).s;
  o.require(stronger, "quantum above deep at every gamma1_minus");
}

void squeezing(Outcome& o) {
  const auto c = preset_config("fig4bc");
  const auto t = run(c);
  check_no_failures(o, t, "fig4bc");
  const double w32 = c.sweep[0].values[1], w63 = c.sweep[0].values[2];
  const double perp = c.sweep[1].values[0], par = c.sweep[1].values[1];
  const double s0 = row_at(t, {0.0, perp}).s;
  const double sp = row_at(t, {w32, perp}).s, sl = row_at(t, {w32, par}).s;
  o.require(sp > s0, "perpendicular S " + fmt(sp) + " vs " + fmt(s0));
  o.require(sl < s0, "parallel S " + fmt(sl) + " vs " + fmt(s0));
  VdpParams p = c.params;
  p.omega2 = w63;
  p.theta = par;
  const auto rho = steady_state(p);
  const auto lobes = find_lobes(wigner_polar(rho, kLobeGrid));
  double separation = 0.0, dip = 0.0;
  if (lobes.size() >= 2) {
    const Complex a = lobes[0].position(), b = lobes[1].position();
    separation = std::abs(a - b);
    double saddle = std::min(lobes[0].value, lobes[1].value);
    for (int k = 0; k <= 100; ++k) saddle = std::min(saddle, wigner_at(rho, a + (b - a) * (k / 100.0)));
    dip = 1.0 - saddle / std::min(lobes[0].value, lobes[1].value);
  }
  o.require(lobes.size() >= 2, std::to_string(lobes.size()) + " maxima above half peak at 63 Hz parallel");
  o.require(separation >= kLobeSeparation,
            "lobe separation " + fmt(separation, 3) + " (needs " + fmt(kLobeSeparation, 3) + "), saddle dip " +
                fmt(100 * dip, 2) + "%");
}

void fixed_point(Outcome& o) {
  VdpParams p;
  p.gamma1_plus = 100.0;
  p.gamma2 = kFixedPointRatio * p.gamma1_plus;
  const auto rho = steady_state(p);
  const double p0 = rho.matrix()(0, 0).real(), p1 = rho.matrix()(1, 1).real();
  o.require(std::abs(p0 - 2.0 / 3.0) <= kFixedPointTolerance && std::abs(p1 - 1.0 / 3.0) <= kFixedPointTolerance,
            "populations (" + fmt(p0, 6) + ", " + fmt(p1, 6) + ")");
}

double terminal_distance(const DensityMatrix& rho0, const PulseSchedule& s, double* worst) {
  const auto traj = run_schedule(rho0, s);
  const auto exact = evolve(rho0, equivalent_params(s), traj.times.back(), kDefaultDt, traj.times);
  double d = 0.0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    std::size_t j = 0;
    while (std::abs(exact.times[j] - traj.times[k]) > 1e-12) ++j;
    d = trace_distance(traj.states[k], exact.states[j]);
    if (worst) *worst = std::max(*worst, d);
  }
  return d;
}

void trotter_equivalence(Outcome& o) {
  auto c = preset_config("fig3b");
  c.params.trunc.n_max = kTrotterNMax;
  const auto schedule = build_schedule(c.params, c.timing, c.timing.n_cycles);
  const auto rho0 = c.initial.build(schedule.trunc);
  double worst = 0.0;
  const double d1 = terminal_distance(rho0, schedule, &worst);
  o.require(worst <= kTrotterMaxDistance, "max boundary trace distance " + fmt(worst));
  const double d2 = terminal_distance(rho0, scale_schedule(schedule, 0.5), nullptr);
  const double d4 = terminal_distance(rho0, scale_schedule(schedule, 0.25), nullptr);
  o.require(d2 < d1 + kMonotoneSlack && d4 < d2 + kMonotoneSlack,
            "terminal distance " + fmt(d1) + " -> " + fmt(d2) + " -> " + fmt(d4));
}

void single_decay(Outcome& o) {
  const double tau = 10e-6, period = 100e-6;
  const int cycles = 100;
  for (double rabi_tau : {0.2, 0.1, 0.05}) {
    PulseSchedule s;
    s.pulses = {{PulseKind::rsb1, rabi_tau / tau, 0.0, 0.0, tau}, {PulseKind::spin_reset}};
    s.cycle_period = period;
    s.n_cycles = cycles;
    s.trunc = FockTruncation{8};
    const double gamma = effective_rates(s).gamma1_minus;
    const auto traj = run_schedule(fock_state(s.trunc, 1), s);
    double worst = 0.0;
    for (int k = 0; k <= cycles; ++k) {
      const double p1 = traj.states[static_cast<std::size_t>(k)].matrix()(1, 1).real();
      worst = std::max(worst, std::abs(p1 / std::exp(-gamma * k * period) - 1.0));
    }
    o.require(worst <= kDecayRelative, "rabi tau " + fmt(rabi_tau) + ": max relative error " + fmt(worst, 3));
  }
}

void units(Outcome& o) {
  const auto check = [&](const std::string& what, double value, double expected) {
    const double err = std::abs(value / expected - 1.0);
    o.require(err <= kRatioRelative, what + " " + fmt(value, 3) + " vs " + fmt(expected, 3));
  };
  const auto p2 = preset_config("fig2").params;
  check("fig2 g2/(g1p-g1m)", p2.gamma2 / (p2.gamma1_plus - p2.gamma1_minus), 0.56);
  const auto p3a = preset_config("fig3a").params;
  check("fig3a O/g1p", p3a.omega / p3a.gamma1_plus, 3.5);
  check("fig3a g2/g1p", p3a.gamma2 / p3a.gamma1_plus, 5.2);
  const auto p3b = preset_config("fig3b").params;
  check("fig3b O/g1p", p3b.omega / p3b.gamma1_plus, 4.7);
  check("fig3b g2/g1p", p3b.gamma2 / p3b.gamma1_plus, 5.7);
  const auto p3d = preset_config("fig3d").params;
  check("fig3d g2/g1p", p3d.gamma2 / p3d.gamma1_plus, 4.7);
  const auto deep = preset_config("fig4a_deep").params;
  check("fig4a_deep g2/g1p", deep.gamma2 / deep.gamma1_plus, 7.9);
  const auto bc = preset_config("fig4bc").params;
  check("fig4bc g2/g1p", bc.gamma2 / bc.gamma1_plus, 4.4);
  check("fig4bc O/g1p", bc.omega / bc.gamma1_plus, 1.2);
}

struct Criterion {
  std::string id;
  double budget;
  std::function<void(Outcome&)> body;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<std::string> expect_fail, only;
  std::string report;
  app.add_option("--expect-fail", expect_fail, "criteria known to fail")->delimiter(',');
  app.add_option("--only", only, "run a subset")->delimiter(',');
  app.add_option("--report", report, "also write the lines to this file");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {"limit_cycle", kBudgetLimitCycle, limit_cycle},
      {"phase_locking", kBudgetPhaseLock, phase_locking},
      {"phase_narrowing", kBudgetNarrowing, phase_narrowing},
      {"arnold_tongue", kBudgetTongue, arnold_tongue},
      {"dissipation_boost", kBudgetBoost, dissipation_boost},
      {"squeezing", kBudgetSqueeze, squeezing},
      {"deep_quantum_fixed_point", kBudgetQuick, fixed_point},
      {"trotter_equivalence", kBudgetTrotter, trotter_equivalence},
      {"single_decay", kBudgetQuick, single_decay},
      {"units", kBudgetQuick, units},
  };
  const std::set<std::string> expected(expect_fail.begin(), expect_fail.end());
  std::ostringstream lines;
  int surprises = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs <= c.budget, "runtime " + fmt(secs, 3) + " s of " + fmt(c.budget, 3) + " s");
    const bool known = expected.count(c.id) > 0;
    if (o.pass == known) ++surprises;
    std::string line = std::string(o.pass ? "PASS" : "FAIL") + " " + c.id + ": " + o.detail.str();
    line.resize(line.size() - 2);
    if (known) line += o.pass ? " (listed as expected failure)" : " (expected failure)";
    std::cout << line << std::endl;
    lines << line << '\n';
  }
  if (!report.empty()) std::ofstream(report) << lines.str();
  return surprises == 0 ? 0 : 1;
}
