#include "qvdp/experiments/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "qvdp/experiments/presets.hpp"

namespace qvdp::experiments {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

struct TimingKey {
  std::string_view name;
  Dimension dimension;
};

const std::vector<TimingKey>& timing_keys() {
  static const std::vector<TimingKey> table{
      {"tau_bsb", Dimension::time},   {"tau_rsb", Dimension::time},   {"tau_2rsb", Dimension::time},
      {"tau_sq", Dimension::time},    {"tau_reset", Dimension::time}, {"tau_idle", Dimension::time},
      {"period", Dimension::time},    {"n_cycles", Dimension::dimensionless},
      {"eta", Dimension::dimensionless}, {"omega_z", Dimension::angular}, {"trap_offset", Dimension::angular},
  };
  return table;
}

const TimingKey* find_timing(std::string_view name) {
  for (const auto& k : timing_keys())
    if (k.name == name) return &k;
  return nullptr;
}

// Everything a document says, normalized to SI, before presets are merged.
struct Draft {
  std::optional<std::string> name, scenario, engine;
  std::map<std::string, double> params;
  std::map<std::string, double> timing;
  std::optional<InitialState> initial;
  std::vector<SweepAxis> sweep;
  std::optional<std::vector<double>> sample_times;
  std::optional<bool> steady;
  std::optional<double> dt;
  std::map<std::string, double> grid;
  std::optional<std::string> csv;
  std::optional<bool> wigner;
  std::vector<std::string> notes;
};

double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError("'" + key + "' must be finite");
  return d;
}

void require_object(const json& v, const std::string& key) {
  if (!v.is_object()) throw ConfigError("'" + key + "' must be an object");
}

// Resolves a unit-suffixed key against a dimension lookup. Returns (base, SI factor).
template <typename Lookup>
std::pair<std::string, double> resolve_key(const std::string& key, Lookup&& lookup, const std::string& section) {
  const SplitKey split = split_unit_suffix(key);
  const auto dim = lookup(split.base);
  if (!dim) {
    const auto bare = lookup(key);
    if (bare && *bare != Dimension::dimensionless)
      throw ConfigError("'" + key + "' in " + section + " needs a unit suffix (" + accepted_suffixes(*bare) + ")");
    if (bare) return {key, 1.0};
    throw ConfigError("unknown key '" + key + "' in " + section);
  }
  if (split.suffix.empty() && *dim != Dimension::dimensionless)
    throw ConfigError("'" + key + "' in " + section + " needs a unit suffix (" + accepted_suffixes(*dim) + ")");
  const auto factor = si_factor(split.suffix, *dim);
  if (!factor)
    throw ConfigError("'" + key + "' in " + section + ": suffix '" + std::string(split.suffix) + "' does not fit; use " +
                      accepted_suffixes(*dim));
  return {split.base, *factor};
}

std::optional<Dimension> param_dimension(const std::string& base) {
  const ParamInfo* p = find_parameter(base);
  return p ? std::optional<Dimension>(p->dimension) : std::nullopt;
}

std::optional<Dimension> timing_dimension(const std::string& base) {
  const TimingKey* k = find_timing(base);
  return k ? std::optional<Dimension>(k->dimension) : std::nullopt;
}

InitialState parse_initial(const json& v) {
  require_object(v, "initial_state");
  InitialState s;
  bool has_kind = false;
  for (const auto& [key, val] : v.items()) {
    if (key == "kind") {
      if (!val.is_string()) throw ConfigError("'initial_state.kind' must be a string");
      const std::string k = val.get<std::string>();
      if (k == "vacuum") s.kind = InitialState::Kind::vacuum;
      else if (k == "coherent") s.kind = InitialState::Kind::coherent;
      else if (k == "displaced_thermal") s.kind = InitialState::Kind::displaced_thermal;
      else throw ConfigError("unknown initial_state kind '" + k + "' (vacuum, coherent, displaced_thermal)");
      has_kind = true;
    } else if (key == "alpha_re") {
      s.alpha.real(number(val, key));
    } else if (key == "alpha_im") {
      s.alpha.imag(number(val, key));
    } else if (key == "nbar") {
      s.nbar = number(val, key);
    } else {
      throw ConfigError("unknown key '" + key + "' in initial_state");
    }
  }
  if (!has_kind) throw ConfigError("initial_state needs 'kind'");
  if (s.nbar < 0) throw ConfigError("initial_state.nbar must be >= 0");
  return s;
}

SweepAxis parse_axis(const json& v) {
  require_object(v, "sweep[]");
  SweepAxis axis;
  std::optional<json> values;
  std::string values_key;
  for (const auto& [key, val] : v.items()) {
    if (key == "name") {
      if (!val.is_string()) throw ConfigError("sweep axis 'name' must be a string");
      axis.name = val.get<std::string>();
    } else if (key.rfind("values", 0) == 0) {
      if (values) throw ConfigError("sweep axis has more than one values key");
      values = val;
      values_key = key;
    } else {
      throw ConfigError("unknown key '" + key + "' in sweep axis");
    }
  }
  if (axis.name.empty()) throw ConfigError("sweep axis needs 'name'");
  const ParamInfo* info = find_parameter(axis.name);
  if (info == nullptr) throw ConfigError("sweep axis '" + axis.name + "' is not a parameter");
  if (!values) throw ConfigError("sweep axis '" + axis.name + "' needs values");
  const std::string_view suffix = std::string_view(values_key).substr(6);
  const auto factor = si_factor(suffix, info->dimension);
  if (!factor)
    throw ConfigError("sweep axis '" + axis.name + "': '" + values_key + "' needs " +
                      (info->dimension == Dimension::dimensionless ? std::string("no suffix")
                                                                   : accepted_suffixes(info->dimension)));
  if (!values->is_array() || values->empty())
    throw ConfigError("sweep axis '" + axis.name + "' needs a non-empty value list");
  for (const auto& x : *values) axis.values.push_back(number(x, values_key) * *factor);
  return axis;
}

Draft parse_draft(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  Draft d;
  for (const auto& [key, val] : doc.items()) {
    if (key == "preset") {
      continue;
    } else if (key == "name" || key == "scenario" || key == "engine") {
      if (!val.is_string()) throw ConfigError("'" + key + "' must be a string");
      (key == "name" ? d.name : key == "scenario" ? d.scenario : d.engine) = val.get<std::string>();
    } else if (key == "params") {
      require_object(val, key);
      for (const auto& [pk, pv] : val.items()) {
        const auto [base, factor] = resolve_key(pk, param_dimension, "params");
        if (d.params.count(base)) throw ConfigError("parameter '" + base + "' given twice");
        d.params[base] = number(pv, pk) * factor;
      }
    } else if (key == "timing") {
      require_object(val, key);
      for (const auto& [tk, tv] : val.items()) {
        const auto [base, factor] = resolve_key(tk, timing_dimension, "timing");
        if (d.timing.count(base)) throw ConfigError("timing '" + base + "' given twice");
        d.timing[base] = number(tv, tk) * factor;
      }
    } else if (key == "initial_state") {
      d.initial = parse_initial(val);
    } else if (key == "sweep") {
      if (!val.is_array()) throw ConfigError("'sweep' must be a list of axes");
      for (const auto& axis : val) d.sweep.push_back(parse_axis(axis));
    } else if (key == "sample_times_us") {
      if (!val.is_array()) throw ConfigError("'sample_times_us' must be a list");
      std::vector<double> times;
      for (const auto& t : val) times.push_back(number(t, key) * 1e-6);
      d.sample_times = std::move(times);
    } else if (key == "steady") {
      if (!val.is_boolean()) throw ConfigError("'steady' must be true or false");
      d.steady = val.get<bool>();
    } else if (key == "dt_us") {
      d.dt = number(val, key) * 1e-6;
    } else if (key == "grid") {
      require_object(val, key);
      for (const auto& [gk, gv] : val.items()) {
        if (gk != "r_max" && gk != "n_r" && gk != "n_phi") throw ConfigError("unknown key '" + gk + "' in grid");
        d.grid[gk] = number(gv, gk);
      }
    } else if (key == "output") {
      require_object(val, key);
      for (const auto& [ok, ov] : val.items()) {
        if (ok == "csv") {
          if (!ov.is_string()) throw ConfigError("'output.csv' must be a string");
          d.csv = ov.get<std::string>();
        } else if (ok == "wigner") {
          if (!ov.is_boolean()) throw ConfigError("'output.wigner' must be true or false");
          d.wigner = ov.get<bool>();
        } else {
          throw ConfigError("unknown key '" + ok + "' in output");
        }
      }
    } else if (key == "notes") {
      if (!val.is_array()) throw ConfigError("'notes' must be a list of strings");
      for (const auto& n : val) {
        if (!n.is_string()) throw ConfigError("'notes' must be a list of strings");
        d.notes.push_back(n.get<std::string>());
      }
    } else {
      const SplitKey split = split_unit_suffix(key);
      if (find_parameter(split.base) != nullptr)
        throw ConfigError("unknown key '" + key + "' at top level; parameters belong under \"params\"");
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  return d;
}

bool same(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

bool same(const InitialState& a, const InitialState& b) {
  return a.kind == b.kind && same(a.alpha.real(), b.alpha.real()) && same(a.alpha.imag(), b.alpha.imag()) &&
         same(a.nbar, b.nbar);
}

bool same(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same(a[i], b[i])) return false;
  return true;
}

Draft merge(Draft base, const Draft& user, const std::string& preset) {
  const auto conflict = [&](const std::string& what) {
    throw ConfigError("conflict with preset '" + preset + "': " + what);
  };
  for (const auto& [k, v] : user.params) {
    auto it = base.params.find(k);
    if (it != base.params.end() && !same(it->second, v))
      conflict("parameter '" + k + "' is " + fmt(it->second) + " in the preset, " + fmt(v) + " in the config");
    for (const auto& axis : base.sweep)
      if (axis.name == k) conflict("parameter '" + k + "' is a sweep axis of the preset");
    base.params[k] = v;
  }
  for (const auto& [k, v] : user.timing) {
    auto it = base.timing.find(k);
    if (it != base.timing.end() && !same(it->second, v))
      conflict("timing '" + k + "' is " + fmt(it->second) + " in the preset, " + fmt(v) + " in the config");
    base.timing[k] = v;
  }
  for (const auto& axis : user.sweep) {
    if (base.params.count(axis.name)) conflict("sweep axis '" + axis.name + "' is also set as a parameter");
    auto it = std::find_if(base.sweep.begin(), base.sweep.end(), [&](const SweepAxis& a) { return a.name == axis.name; });
    if (it == base.sweep.end())
      base.sweep.push_back(axis);
    else if (!same(it->values, axis.values))
      conflict("sweep axis '" + axis.name + "' has different values in the preset");
  }
  if (user.scenario) {
    if (base.scenario && *base.scenario != *user.scenario)
      conflict("scenario '" + *user.scenario + "' vs '" + *base.scenario + "'");
    base.scenario = user.scenario;
  }
  if (user.initial) {
    if (base.initial && !same(*base.initial, *user.initial)) conflict("initial_state differs");
    base.initial = user.initial;
  }
  if (user.sample_times) {
    if (base.sample_times && !same(*base.sample_times, *user.sample_times)) conflict("sample_times_us differ");
    base.sample_times = user.sample_times;
  }
  if (user.steady) {
    if (base.steady && *base.steady != *user.steady) conflict("steady differs");
    base.steady = user.steady;
  }
  if (user.name) base.name = user.name;
  if (user.engine) base.engine = user.engine;
  if (user.dt) base.dt = user.dt;
  for (const auto& [k, v] : user.grid) base.grid[k] = v;
  if (user.csv) base.csv = user.csv;
  if (user.wigner) base.wigner = user.wigner;
  base.notes.insert(base.notes.end(), user.notes.begin(), user.notes.end());
  return base;
}

int as_count(double v, const std::string& key, int minimum) {
  if (v != std::floor(v) || v < minimum)
    throw ConfigError("'" + key + "' must be an integer >= " + std::to_string(minimum));
  return static_cast<int>(v);
}

ExperimentConfig finalize(const Draft& d, const std::optional<std::string>& preset) {
  std::vector<std::string> missing;
  if (!d.scenario) missing.push_back("scenario");
  if (d.params.empty()) missing.push_back("params");
  if (!d.sample_times && !d.steady.value_or(false)) missing.push_back("sample_times_us or steady");
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw ConfigError("missing required fields: " + list + " (or name a preset)");
  }

  ExperimentConfig c;
  c.preset = preset;
  c.name = d.name.value_or(preset.value_or("custom"));
  const auto scenario = parse_scenario(*d.scenario);
  if (!scenario) throw ConfigError("unknown scenario '" + *d.scenario + "'");
  c.scenario = *scenario;
  if (d.engine) {
    const auto engine = parse_engine(*d.engine);
    if (!engine) throw ConfigError("unknown engine '" + *d.engine + "' (exact, trotter_rwa, trotter_full)");
    c.engine = *engine;
  }
  for (const auto& [k, v] : d.params) apply_parameter(k, v, c.params, c.initial);
  if (d.initial) {
    const InitialState parsed = *d.initial;
    c.initial = parsed;
  } else if (!d.steady.value_or(false)) {
    throw ConfigError("missing required field: initial_state");
  }
  // initial-state parameters given under "params" override the initial_state block
  for (const char* k : {"alpha_re", "alpha_im", "nbar"})
    if (d.params.count(k)) apply_parameter(k, d.params.at(k), c.params, c.initial);

  for (const auto& [k, v] : d.timing) {
    PulseTiming& t = c.timing;
    if (k == "tau_bsb") t.tau_bsb = v;
    else if (k == "tau_rsb") t.tau_rsb = v;
    else if (k == "tau_2rsb") t.tau_2rsb = v;
    else if (k == "tau_sq") t.tau_sq = v;
    else if (k == "tau_reset") t.tau_reset = v;
    else if (k == "tau_idle") t.tau_idle = v;
    else if (k == "period") t.period = v;
    else if (k == "n_cycles") t.n_cycles = as_count(v, "n_cycles", 0);
    else if (k == "eta") t.eta = v;
    else if (k == "omega_z") t.omega_z = v;
    else if (k == "trap_offset") t.trap_offset = v;
    if (k.rfind("tau_", 0) == 0 && v < 0) throw ConfigError("timing '" + k + "' must be >= 0");
  }
  const double busy = c.timing.tau_bsb + c.timing.tau_rsb + c.timing.tau_2rsb + c.timing.tau_sq + c.timing.tau_reset +
                      c.timing.tau_idle;
  if (c.timing.defined() && busy > c.timing.period * (1 + 1e-12))
    throw ConfigError("timing: pulse times sum to " + fmt(busy * 1e6) + " us, more than the period " +
                      fmt(c.timing.period * 1e6) + " us");

  if (d.sweep.size() > 2) throw ConfigError("at most two sweep axes are supported");
  std::set<std::string> names;
  for (const auto& axis : d.sweep) {
    if (!names.insert(axis.name).second) throw ConfigError("sweep axis '" + axis.name + "' given twice");
    if (d.params.count(axis.name))
      throw ConfigError("'" + axis.name + "' is both a parameter and a sweep axis");
  }
  c.sweep = d.sweep;

  c.steady = d.steady.value_or(false);
  if (c.steady && d.sample_times) throw ConfigError("'steady' and 'sample_times_us' are exclusive");
  if (d.sample_times) {
    c.sample_times = *d.sample_times;
    if (c.sample_times.empty()) throw ConfigError("'sample_times_us' is empty");
    for (double t : c.sample_times)
      if (t < 0) throw ConfigError("sample times must be >= 0");
    std::sort(c.sample_times.begin(), c.sample_times.end());
    if (std::adjacent_find(c.sample_times.begin(), c.sample_times.end()) != c.sample_times.end())
      throw ConfigError("sample times must be distinct");
  }
  if (d.dt) {
    if (!(*d.dt > 0)) throw ConfigError("'dt_us' must be > 0");
    c.dt = *d.dt;
  }
  if (d.grid.count("r_max")) c.grid.r_max = d.grid.at("r_max");
  if (d.grid.count("n_r")) c.grid.n_r = as_count(d.grid.at("n_r"), "n_r", 2);
  if (d.grid.count("n_phi")) c.grid.n_phi = as_count(d.grid.at("n_phi"), "n_phi", 1);
  if (!(c.grid.r_max > 0)) throw ConfigError("'grid.r_max' must be > 0");
  if (d.csv) c.output.csv = *d.csv;
  if (d.wigner) c.output.wigner = *d.wigner;
  c.notes = d.notes;

  try {
    c.params.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (c.engine != EngineKind::exact) {
    if (!c.timing.defined())
      throw ConfigError("engine " + std::string(to_string(c.engine)) + " needs pulse timing (timing.period_us)");
    for (double t : c.sample_times) {
      const double cycles = t / c.timing.period;
      if (std::abs(cycles - std::round(cycles)) > 1e-9)
        throw ConfigError("sample time " + fmt(t * 1e6) + " us is not a whole number of cycles for engine " +
                          std::string(to_string(c.engine)));
    }
    if (c.steady && c.timing.n_cycles <= 0)
      throw ConfigError("steady rows with a Trotter engine need timing.n_cycles > 0");
  }
  return c;
}

std::string with_units(double si, Dimension dim) {
  switch (dim) {
    case Dimension::rate: return fmt(si) + " s^-1 (" + fmt(si / 1e3) + " kHz)";
    case Dimension::angular: return fmt(si) + " rad/s (2pi x " + fmt(si / (2 * std::numbers::pi)) + " Hz)";
    case Dimension::time: return fmt(si) + " s (" + fmt(si * 1e6) + " us)";
    case Dimension::angle: return fmt(si) + " rad";
    case Dimension::dimensionless: return fmt(si);
  }
  return fmt(si);
}

}  // namespace

ExperimentConfig load_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config does not parse: ") + e.what());
  }
  if (doc.is_object() && doc.empty())
    throw ConfigError("empty config; required fields: scenario, params, initial_state, sample_times_us or steady "
                      "(or name a preset)");
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  std::optional<std::string> preset;
  if (doc.contains("preset")) {
    if (!doc["preset"].is_string()) throw ConfigError("'preset' must be a string");
    preset = doc["preset"].get<std::string>();
  }
  Draft user = parse_draft(doc);
  if (!preset) return finalize(user, std::nullopt);
  const auto preset_doc = preset_document(*preset);
  if (!preset_doc) {
    std::string names;
    for (auto n : preset_names()) names += (names.empty() ? "" : ", ") + std::string(n);
    throw ConfigError("unknown preset '" + *preset + "' (" + names + ")");
  }
  Draft base = parse_draft(json::parse(preset_doc->begin(), preset_doc->end()));
  return finalize(merge(std::move(base), user, *preset), preset);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

std::string describe(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "name: " << c.name << "\n";
  if (c.preset) os << "preset: " << *c.preset << "\n";
  os << "scenario: " << to_string(c.scenario) << "\n";
  os << "engine: " << to_string(c.engine) << "\n";
  os << "params:\n";
  for (const auto& p : parameter_registry()) {
    if (p.name == "alpha_re" || p.name == "alpha_im" || p.name == "nbar") continue;
    const bool swept =
        std::any_of(c.sweep.begin(), c.sweep.end(), [&](const SweepAxis& a) { return a.name == p.name; });
    os << "  " << p.name << " = ";
    if (swept)
      os << "(swept)";
    else
      os << with_units(read_parameter(p.name, c.params, c.initial), p.dimension);
    os << "\n";
  }
  if (c.params.gamma1_plus > 0) {
    os << "  gamma2 / gamma1_plus = " << fmt(c.params.gamma2 / c.params.gamma1_plus) << "\n";
    os << "  omega / gamma1_plus = " << fmt(c.params.omega / c.params.gamma1_plus) << "\n";
  }
  if (c.timing.defined()) {
    const PulseTiming& t = c.timing;
    os << "timing: tau_bsb = " << fmt(t.tau_bsb * 1e6) << " us, tau_rsb = " << fmt(t.tau_rsb * 1e6)
       << " us, tau_2rsb = " << fmt(t.tau_2rsb * 1e6) << " us, tau_sq = " << fmt(t.tau_sq * 1e6)
       << " us, tau_reset = " << fmt(t.tau_reset * 1e6) << " us, tau_idle = " << fmt(t.tau_idle * 1e6)
       << " us, period = " << fmt(t.period * 1e6) << " us, n_cycles = " << t.n_cycles << ", eta = " << fmt(t.eta)
       << ", omega_z = " << with_units(t.omega_z, Dimension::angular) << "\n";
  }
  os << "initial_state: ";
  switch (c.initial.kind) {
    case InitialState::Kind::vacuum: os << "vacuum"; break;
    case InitialState::Kind::coherent:
      os << "coherent(alpha = " << fmt(c.initial.alpha.real()) << " + " << fmt(c.initial.alpha.imag()) << "i)";
      break;
    case InitialState::Kind::displaced_thermal:
      os << "displaced_thermal(nbar = " << fmt(c.initial.nbar) << ", alpha = " << fmt(c.initial.alpha.real())
         << " + " << fmt(c.initial.alpha.imag()) << "i)";
      break;
  }
  os << "\n";
  for (const auto& axis : c.sweep) {
    const ParamInfo* info = find_parameter(axis.name);
    os << "sweep " << axis.name << ":";
    for (double v : axis.values) os << "\n  " << with_units(v, info->dimension);
    os << "\n";
  }
  if (c.steady) {
    os << "samples: steady state\n";
  } else {
    os << "sample_times:";
    for (double t : c.sample_times) os << " " << fmt(t * 1e6) << " us";
    os << "\n";
  }
  os << "dt: " << fmt(c.dt * 1e6) << " us\n";
  os << "grid: r_max = " << fmt(c.grid.r_max) << ", n_r = " << c.grid.n_r << ", n_phi = " << c.grid.n_phi << "\n";
  os << "points: " << c.n_points() << "\n";
  for (const auto& n : c.notes) os << "note: " << n << "\n";
  return os.str();
}

}  // namespace qvdp::experiments
