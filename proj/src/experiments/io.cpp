#include "qvdp/experiments/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace qvdp::experiments {

namespace {

constexpr const char* kFixedColumns[] = {"time_s", "S",     "mean_phase_rad", "re_a",       "im_a",
                                         "n_mean", "purity", "status",         "wigner_file"};
constexpr std::size_t kNumFixed = std::size(kFixedColumns);
constexpr std::string_view kWignerMagic = "# qvdp-wigner 1";

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

// One record; quoted fields may span lines. Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  for (int c = in.get(); c != std::char_traits<char>::eof(); c = in.get()) {
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      break;
    } else if (ch != '\r') {
      field += ch;
    }
  }
  if (quoted) throw ConfigError("csv: unterminated quoted field");
  fields.push_back(std::move(field));
  return true;
}

std::string axis_column(const std::string& name) {
  const ParamInfo* info = find_parameter(name);
  const std::string_view label = info ? si_label(info->dimension) : std::string_view{};
  return label.empty() ? name : name + "_" + std::string(label);
}

std::string axis_name(const std::string& column) {
  for (const auto& p : parameter_registry())
    if (axis_column(std::string(p.name)) == column) return std::string(p.name);
  throw ConfigError("csv: unknown sweep column '" + column + "'");
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw ConfigError("not a number: '" + std::string(text) + "'");
  return v;
}

std::vector<std::string> csv_header(const std::vector<std::string>& axes) {
  std::vector<std::string> header;
  for (const auto& a : axes) header.push_back(axis_column(a));
  for (const char* c : kFixedColumns) header.emplace_back(c);
  return header;
}

void write_csv(const ResultTable& table, std::ostream& out) {
  const auto header = csv_header(table.axes);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << "\n";
  for (const auto& row : table.rows) {
    for (double c : row.coords) out << format_double(c) << ",";
    out << format_double(row.time) << "," << format_double(row.s) << ","
        << (row.mean_phase ? format_double(*row.mean_phase) : "") << "," << format_double(row.re_a) << ","
        << format_double(row.im_a) << "," << format_double(row.n_mean) << "," << format_double(row.purity) << ","
        << quote(row.status) << "," << quote(row.wigner_file) << "\n";
  }
}

void write_csv_file(const ResultTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_csv(table, out);
}

ResultTable read_csv(std::istream& in) {
  std::vector<std::string> fields;
  if (!read_record(in, fields)) throw ConfigError("csv: no header");
  if (fields.size() < kNumFixed) throw ConfigError("csv: header has too few columns");
  const std::size_t n_axes = fields.size() - kNumFixed;
  for (std::size_t k = 0; k < kNumFixed; ++k)
    if (fields[n_axes + k] != kFixedColumns[k])
      throw ConfigError("csv: expected column '" + std::string(kFixedColumns[k]) + "', found '" + fields[n_axes + k] +
                        "'");
  ResultTable table;
  for (std::size_t k = 0; k < n_axes; ++k) table.axes.push_back(axis_name(fields[k]));

  std::vector<std::vector<double>> failed, seen;
  std::size_t line = 1;
  while (read_record(in, fields)) {
    ++line;
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != n_axes + kNumFixed)
      throw ConfigError("csv line " + std::to_string(line) + ": expected " + std::to_string(n_axes + kNumFixed) +
                        " fields, found " + std::to_string(fields.size()));
    ResultRow row;
    for (std::size_t k = 0; k < n_axes; ++k) row.coords.push_back(parse_double(fields[k]));
    const auto f = [&](std::size_t k) { return parse_double(fields[n_axes + k]); };
    row.time = f(0);
    row.s = f(1);
    if (!fields[n_axes + 2].empty()) row.mean_phase = f(2);
    row.re_a = f(3);
    row.im_a = f(4);
    row.n_mean = f(5);
    row.purity = f(6);
    row.status = fields[n_axes + 7];
    row.wigner_file = fields[n_axes + 8];
    if (std::find(seen.begin(), seen.end(), row.coords) == seen.end()) seen.push_back(row.coords);
    if (row.failed() && std::find(failed.begin(), failed.end(), row.coords) == failed.end())
      failed.push_back(row.coords);
    table.rows.push_back(std::move(row));
  }
  table.total_points = seen.size();
  table.failed_points = failed.size();
  return table;
}

ResultTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  return read_csv(in);
}

void write_wigner_text(const WignerDump& dump, std::ostream& out) {
  const WignerGrid& g = dump.grid;
  out << kWignerMagic << "\n";
  out << "# r_max " << format_double(g.r_axis.empty() ? 0.0 : g.r_axis.back()) << "\n";
  out << "# n_r " << g.r_axis.size() << "\n";
  out << "# n_phi " << g.phi_axis.size() << "\n";
  for (const auto& [key, value] : dump.meta) out << "# " << key << " " << value << "\n";
  out << "r\\phi";
  for (double phi : g.phi_axis) out << "," << format_double(phi);
  out << "\n";
  for (std::size_t i = 0; i < g.r_axis.size(); ++i) {
    out << format_double(g.r_axis[i]);
    for (std::size_t j = 0; j < g.phi_axis.size(); ++j)
      out << "," << format_double(g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    out << "\n";
  }
}

void write_wigner_file(const WignerDump& dump, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_wigner_text(dump, out);
}

WignerDump read_wigner_text(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kWignerMagic) throw ConfigError("wigner: missing '# qvdp-wigner 1' header");
  WignerDump dump;
  long n_r = -1, n_phi = -1;
  while (in.peek() == '#' && std::getline(in, line)) {
    const auto space = line.find(' ', 2);
    if (line.size() < 3 || space == std::string::npos) throw ConfigError("wigner: malformed meta line '" + line + "'");
    const std::string key = line.substr(2, space - 2);
    const std::string value = line.substr(space + 1);
    if (key == "n_r") n_r = std::stol(value);
    else if (key == "n_phi") n_phi = std::stol(value);
    else if (key != "r_max") dump.meta.emplace_back(key, value);
  }
  if (n_r < 0 || n_phi < 0) throw ConfigError("wigner: n_r and n_phi meta lines are required");
  std::vector<std::string> fields;
  if (!read_record(in, fields) || fields.size() != static_cast<std::size_t>(n_phi) + 1 || fields[0] != "r\\phi")
    throw ConfigError("wigner: bad axis header");
  WignerGrid& g = dump.grid;
  for (long j = 0; j < n_phi; ++j) g.phi_axis.push_back(parse_double(fields[j + 1]));
  g.values.resize(n_r, n_phi);
  for (long i = 0; i < n_r; ++i) {
    if (!read_record(in, fields) || fields.size() != static_cast<std::size_t>(n_phi) + 1)
      throw ConfigError("wigner: row " + std::to_string(i) + " is malformed");
    g.r_axis.push_back(parse_double(fields[0]));
    for (long j = 0; j < n_phi; ++j) g.values(i, j) = parse_double(fields[j + 1]);
  }
  return dump;
}

WignerDump read_wigner_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  return read_wigner_text(in);
}

}  // namespace qvdp::experiments
