#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qvdp/experiments/config.hpp"

namespace qvdp::experiments {

struct ResultRow {
  std::vector<double> coords;         // one value per sweep axis, SI
  double time = 0.0;                  // s; +inf for null-space steady states
  double s = 0.0;
  std::optional<double> mean_phase;   // absent below kMeanPhaseThreshold and on failed points
  double re_a = 0.0;
  double im_a = 0.0;
  double n_mean = 0.0;
  double purity = 0.0;
  std::string status = "ok";          // "ok", "warn: ..." or "error: ..."
  std::string wigner_file;            // relative to the output directory; empty when not dumped

  bool failed() const { return status.rfind("error", 0) == 0; }
};

/// NaN-aware exact equality (bitwise for doubles, NaN equals NaN).
bool identical(const ResultRow& a, const ResultRow& b);

struct ResultTable {
  std::vector<std::string> axes;  // parameter names, same order as ResultRow::coords
  std::vector<ResultRow> rows;    // sorted by coords, then time
  std::size_t failed_points = 0;
  std::size_t total_points = 0;

  bool all_failed() const { return total_points > 0 && failed_points == total_points; }
};

struct RunOptions {
  int workers = 1;
  std::string out_dir;  // Wigner dumps go here when config.output.wigner; empty disables them
};

/// Cartesian sweep points, first axis varying slowest. A config without sweep has one empty point.
std::vector<std::vector<double>> sweep_points(const ExperimentConfig& config);

/// Runs every sweep point with the configured engine. A failing point yields rows marked
/// "error: ..." with NaN observables; the run continues. Row order does not depend on workers.
ResultTable run(const ExperimentConfig& config, const RunOptions& options = {});

struct TonguePoint {
  double delta = 0.0;
  double omega = 0.0;
};

struct TongueSummary {
  std::vector<double> omega_axis;  // ascending
  std::vector<double> delta_axis;  // ascending
  Eigen::MatrixXd s;               // s(i, j) = S(omega_i, delta_j)
  double iso_level = 0.5;
  std::vector<TonguePoint> contour;  // linear crossings of iso_level on grid edges
};

/// S grid over the omega and delta axes of an arnold_tongue table. Throws ConfigError listing
/// every missing or failed grid point.
TongueSummary arnold_tongue_summary(const ResultTable& table, double iso_level = 0.5);

}  // namespace qvdp::experiments
