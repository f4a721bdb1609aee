#include "qvdp/experiments/runner.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <set>
#include <thread>

#include "qvdp/experiments/io.hpp"

namespace qvdp::experiments {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_bits(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

struct PointJob {
  std::size_t index = 0;
  std::vector<double> coords;
};

std::string join(const std::vector<std::string>& messages) {
  std::string out;
  for (const auto& m : messages) out += (out.empty() ? "" : "; ") + m;
  return out;
}

ResultRow observe(const DensityMatrix& rho, const ExperimentConfig& c, const VdpParams& params, const PointJob& job,
                  double time, int sample_index, const RunOptions& options, Flags& flags) {
  ResultRow row;
  row.coords = job.coords;
  row.time = time;
  const WignerGrid w = wigner_polar(rho, c.grid, &flags);
  const SyncMeasure sm = sync_measure(phase_distribution(w, &flags));
  row.s = sm.s;
  row.mean_phase = sm.mean_phase;
  const Complex a = mean_amplitude(rho);
  row.re_a = a.real();
  row.im_a = a.imag();
  row.n_mean = mean_number(rho);
  row.purity = purity(rho);
  if (c.output.wigner && !options.out_dir.empty()) {
    char name[64];
    std::snprintf(name, sizeof name, "wigner_p%04zu_t%03d.txt", job.index, sample_index);
    WignerDump dump{w, {}};
    dump.meta.emplace_back("config", c.name);
    for (std::size_t k = 0; k < c.sweep.size(); ++k)
      dump.meta.emplace_back(c.sweep[k].name, format_double(job.coords[k]));
    dump.meta.emplace_back("time_s", format_double(time));
    dump.meta.emplace_back("S", format_double(sm.s));
    if (params.gamma2 > 0 && params.gamma1_plus >= params.gamma1_minus)
      dump.meta.emplace_back("r_c", format_double(classical_limit_radius(params.gamma1_plus, params.gamma1_minus,
                                                                         params.gamma2)));
    write_wigner_file(dump, (std::filesystem::path(options.out_dir) / name).string());
    row.wigner_file = name;
  }
  return row;
}

// State at a recorded time; trajectories hold exactly the requested times.
const DensityMatrix& state_at(const Trajectory& traj, double t) {
  for (std::size_t k = 0; k < traj.times.size(); ++k)
    if (std::abs(traj.times[k] - t) <= 1e-12 * std::max(1.0, t)) return traj.states[k];
  throw Error("no recorded state at t = " + format_double(t));
}

std::vector<ResultRow> run_point(const ExperimentConfig& c, const PointJob& job, const RunOptions& options) {
  VdpParams params = c.params;
  InitialState initial = c.initial;
  for (std::size_t k = 0; k < c.sweep.size(); ++k) apply_parameter(c.sweep[k].name, job.coords[k], params, initial);

  const bool trotter = c.engine != EngineKind::exact;
  std::vector<double> times = c.sample_times;
  if (c.steady) times = {trotter ? c.timing.period * c.timing.n_cycles : kInf};

  std::vector<ResultRow> rows;
  try {
    params.validate();
    Flags point_flags;
    std::vector<DensityMatrix> states;
    if (!trotter && c.steady) {
      SteadyStateReport report;
      states.push_back(steady_state(params, &report));
      point_flags.messages = report.flags.messages;
    } else if (!trotter) {
      const DensityMatrix rho0 = initial.build(params.trunc, &point_flags);
      const Trajectory traj = evolve(rho0, params, times.back(), c.dt, times);
      for (double t : times) states.push_back(state_at(traj, t));
    } else {
      const DensityMatrix rho0 = initial.build(params.trunc, &point_flags);
      const int cycles = static_cast<int>(std::lround(times.back() / c.timing.period));
      const PulseSchedule schedule = build_schedule(params, c.timing, cycles, &point_flags);
      TrotterOptions opts;
      opts.mode = c.engine == EngineKind::trotter_full ? FidelityMode::full : FidelityMode::rotating_wave;
      opts.dt = c.dt;
      const Trajectory traj = run_schedule(rho0, schedule, opts);
      for (double t : times) {
        const auto k = static_cast<std::size_t>(std::lround(t / c.timing.period));
        states.push_back(traj.states.at(k));
      }
    }
    for (std::size_t k = 0; k < states.size(); ++k) {
      Flags flags = point_flags;
      ResultRow row = observe(states[k], c, params, job, times[k], static_cast<int>(k), options, flags);
      if (flags.any()) row.status = "warn: " + join(flags.messages);
      rows.push_back(std::move(row));
    }
  } catch (const std::exception& e) {
    rows.clear();
    for (double t : times) {
      ResultRow row;
      row.coords = job.coords;
      row.time = t;
      row.s = row.re_a = row.im_a = row.n_mean = row.purity = kNaN;
      row.status = std::string("error: ") + e.what();
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace

bool identical(const ResultRow& a, const ResultRow& b) {
  if (a.coords.size() != b.coords.size()) return false;
  for (std::size_t k = 0; k < a.coords.size(); ++k)
    if (!same_bits(a.coords[k], b.coords[k])) return false;
  if (a.mean_phase.has_value() != b.mean_phase.has_value()) return false;
  if (a.mean_phase && !same_bits(*a.mean_phase, *b.mean_phase)) return false;
  return same_bits(a.time, b.time) && same_bits(a.s, b.s) && same_bits(a.re_a, b.re_a) &&
         same_bits(a.im_a, b.im_a) && same_bits(a.n_mean, b.n_mean) && same_bits(a.purity, b.purity) &&
         a.status == b.status && a.wigner_file == b.wigner_file;
}

std::vector<std::vector<double>> sweep_points(const ExperimentConfig& config) {
  std::vector<std::vector<double>> points{{}};
  for (const auto& axis : config.sweep) {
    std::vector<std::vector<double>> next;
    for (const auto& p : points)
      for (double v : axis.values) {
        next.push_back(p);
        next.back().push_back(v);
      }
    points = std::move(next);
  }
  return points;
}

ResultTable run(const ExperimentConfig& config, const RunOptions& options) {
  const auto points = sweep_points(config);
  if (config.output.wigner && !options.out_dir.empty()) std::filesystem::create_directories(options.out_dir);

  std::vector<std::vector<ResultRow>> results(points.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++)
      results[i] = run_point(config, PointJob{i, points[i]}, options);
  };
  const std::size_t n_workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.workers, 1)), 1,
                                                        points.size());
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ResultTable table;
  for (const auto& axis : config.sweep) table.axes.push_back(axis.name);
  table.total_points = points.size();
  for (auto& rows : results) {
    if (!rows.empty() && rows.front().failed()) ++table.failed_points;
    for (auto& row : rows) table.rows.push_back(std::move(row));
  }
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.coords != b.coords) return a.coords < b.coords;
    return a.time < b.time;
  });
  return table;
}

TongueSummary arnold_tongue_summary(const ResultTable& table, double iso_level) {
  const auto find_axis = [&](const char* name) {
    const auto it = std::find(table.axes.begin(), table.axes.end(), name);
    if (it == table.axes.end()) throw ConfigError(std::string("arnold tongue summary needs a '") + name + "' axis");
    return static_cast<std::size_t>(it - table.axes.begin());
  };
  const std::size_t io = find_axis("omega");
  const std::size_t id = find_axis("delta");
  std::set<double> omegas, deltas;
  for (const auto& row : table.rows) {
    omegas.insert(row.coords[io]);
    deltas.insert(row.coords[id]);
  }
  TongueSummary out;
  out.iso_level = iso_level;
  out.omega_axis.assign(omegas.begin(), omegas.end());
  out.delta_axis.assign(deltas.begin(), deltas.end());
  const auto ni = static_cast<Eigen::Index>(out.omega_axis.size());
  const auto nj = static_cast<Eigen::Index>(out.delta_axis.size());
  out.s = Eigen::MatrixXd::Constant(ni, nj, kNaN);
  std::set<std::pair<double, double>> failed;
  for (const auto& row : table.rows) {
    if (row.failed()) {
      failed.insert({row.coords[io], row.coords[id]});
      continue;
    }
    const auto i = std::lower_bound(out.omega_axis.begin(), out.omega_axis.end(), row.coords[io]) -
                   out.omega_axis.begin();
    const auto j = std::lower_bound(out.delta_axis.begin(), out.delta_axis.end(), row.coords[id]) -
                   out.delta_axis.begin();
    out.s(i, j) = row.s;  // rows are time-sorted, so the latest sample wins
  }
  std::string missing, broken;
  for (Eigen::Index i = 0; i < ni; ++i)
    for (Eigen::Index j = 0; j < nj; ++j) {
      if (!std::isnan(out.s(i, j))) continue;
      const bool was_failed = failed.count({out.omega_axis[i], out.delta_axis[j]}) > 0;
      std::string& list = was_failed ? broken : missing;
      list += (list.empty() ? "" : ", ") + std::string("(omega = ") + format_double(out.omega_axis[i]) +
              ", delta = " + format_double(out.delta_axis[j]) + ")";
    }
  if (!missing.empty() || !broken.empty()) {
    std::string msg = "arnold tongue grid is incomplete;";
    if (!missing.empty()) msg += " missing " + missing + ";";
    if (!broken.empty()) msg += " failed " + broken + ";";
    msg.pop_back();
    throw ConfigError(msg);
  }

  const auto crossing = [&](double s0, double s1) { return (iso_level - s0) / (s1 - s0); };
  for (Eigen::Index i = 0; i < ni; ++i)
    for (Eigen::Index j = 0; j + 1 < nj; ++j) {
      const double a = out.s(i, j) - iso_level, b = out.s(i, j + 1) - iso_level;
      if ((a < 0) != (b < 0)) {
        const double f = crossing(out.s(i, j), out.s(i, j + 1));
        out.contour.push_back({out.delta_axis[j] + f * (out.delta_axis[j + 1] - out.delta_axis[j]), out.omega_axis[i]});
      }
    }
  for (Eigen::Index j = 0; j < nj; ++j)
    for (Eigen::Index i = 0; i + 1 < ni; ++i) {
      const double a = out.s(i, j) - iso_level, b = out.s(i + 1, j) - iso_level;
      if ((a < 0) != (b < 0)) {
        const double f = crossing(out.s(i, j), out.s(i + 1, j));
        out.contour.push_back({out.delta_axis[j], out.omega_axis[i] + f * (out.omega_axis[i + 1] - out.omega_axis[i])});
      }
    }
  return out;
}

}  // namespace qvdp::experiments
