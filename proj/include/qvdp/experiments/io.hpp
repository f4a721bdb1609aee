#pragma once

// Text formats shared with the plotting component.
//
// CSV: header row, one row per ResultRow. Sweep columns are "<name>_<si label>", then
// time_s, S, mean_phase_rad, re_a, im_a, n_mean, purity, status, wigner_file. Floats are the
// shortest round-trip representation; inf and nan are spelled as such; an absent mean phase
// is an empty field.
//
// Wigner text: "# qvdp-wigner 1", then "# key value" metadata lines (r_max, n_r, n_phi and
// free-form entries), then a header "r\phi,phi_0,...", then one row per radius.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qvdp/experiments/runner.hpp"
#include "qvdp/tomography.hpp"

namespace qvdp::experiments {

std::string format_double(double v);
double parse_double(std::string_view text);

std::vector<std::string> csv_header(const std::vector<std::string>& axes);
void write_csv(const ResultTable& table, std::ostream& out);
void write_csv_file(const ResultTable& table, const std::string& path);

/// Rows and axes from a CSV written by write_csv; failed/total point counts are recomputed.
/// Throws ConfigError on malformed input.
ResultTable read_csv(std::istream& in);
ResultTable read_csv_file(const std::string& path);

struct WignerDump {
  WignerGrid grid;
  std::vector<std::pair<std::string, std::string>> meta;  // besides r_max, n_r, n_phi
};

void write_wigner_text(const WignerDump& dump, std::ostream& out);
void write_wigner_file(const WignerDump& dump, const std::string& path);
WignerDump read_wigner_text(std::istream& in);
WignerDump read_wigner_file(const std::string& path);

}  // namespace qvdp::experiments
