#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "qvdp/experiments/io.hpp"
#include "qvdp/experiments/presets.hpp"
#include "qvdp/experiments/runner.hpp"

using namespace qvdp;
using namespace qvdp::experiments;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string config_error(std::string_view text) {
  try {
    load_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& haystack, std::string_view needle) { return haystack.find(needle) != std::string::npos; }

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qvdp_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string csv_text(const ResultTable& table) {
  std::ostringstream out;
  write_csv(table, out);
  return out.str();
}

double ratio_error(double value, double expected) { return std::abs(value / expected - 1.0); }

int run_cli(const std::string& args) {
  const int status = std::system((std::string(QVDP_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("limit-cycle preset values") {
  const auto c = preset_config("fig2");
  CHECK(c.scenario == Scenario::limit_cycle);
  CHECK(c.engine == EngineKind::exact);
  CHECK(c.params.gamma1_plus == doctest::Approx(2060.0));
  CHECK(c.params.gamma1_minus == doctest::Approx(90.0));
  CHECK(c.params.gamma2 == doctest::Approx(1110.0));
  CHECK(c.params.gamma_h == doctest::Approx(90.0));
  CHECK(c.params.omega == 0.0);
  CHECK(c.params.omega2 == 0.0);
  CHECK(c.params.delta == 0.0);
  CHECK(c.initial.kind == InitialState::Kind::displaced_thermal);
  CHECK(c.initial.nbar == 1.5);
  CHECK(c.initial.alpha == Complex(1.0));
  REQUIRE(c.sample_times.size() == 4);
  CHECK(c.sample_times.back() == doctest::Approx(4e-3));
  CHECK(c.timing.period == doctest::Approx(200e-6));
  CHECK(c.timing.tau_2rsb == doctest::Approx(150e-6));
}

TEST_CASE("every preset loads and describes itself") {
  const auto names = preset_names();
  CHECK(names.size() == 10);
  for (auto name : names) {
    CAPTURE(name);
    const auto c = preset_config(name);
    CHECK(c.n_points() >= 1);
    const std::string text = describe(c);
    CHECK(contains(text, "gamma1_plus"));
    CHECK(contains(text, "s^-1"));
  }
  CHECK_THROWS_AS(preset_config("fig9"), ConfigError);
  CHECK(contains(config_error(R"({"preset": "fig9"})"), "fig3b"));
}

TEST_CASE("config errors name the offending input") {
  SUBCASE("empty document lists the required fields") {
    const auto e = config_error("{}");
    CHECK(contains(e, "scenario"));
    CHECK(contains(e, "params"));
    CHECK(contains(e, "initial_state"));
  }
  SUBCASE("unknown keys") {
    CHECK(contains(config_error(R"({"preset": "fig2", "params": {"gamma3_khz": 1}})"), "gamma3"));
    CHECK(contains(config_error(R"({"preset": "fig2", "gamma3": 1})"), "gamma3"));
    CHECK(contains(config_error(R"({"preset": "fig2", "gamma2_khz": 1.11})"), "belong under"));
  }
  SUBCASE("unit suffixes") {
    CHECK(contains(config_error(R"({"preset": "fig2", "params": {"gamma2": 1110}})"), "needs a unit suffix"));
    CHECK(contains(config_error(R"({"preset": "fig2", "params": {"gamma2_hz_over_2pi": 100}})"), "does not fit"));
    CHECK(contains(config_error(R"({"preset": "fig2", "timing": {"period": 200}})"), "unit suffix"));
  }
  SUBCASE("preset conflicts") {
    CHECK(contains(config_error(R"({"preset": "fig2", "params": {"gamma2_khz": 1.5}})"), "conflict"));
    CHECK(config_error(R"({"preset": "fig2", "params": {"gamma2_khz": 1.11}})").empty());
    CHECK(contains(config_error(R"({"preset": "fig3d", "params": {"omega_hz_over_2pi": 40}})"), "conflict"));
    CHECK(contains(config_error(R"({"preset": "fig2", "sweep": [{"name": "gamma2", "values_khz": [1, 2]}]})"),
                   "conflict"));
    CHECK(contains(config_error(R"({"preset": "fig2", "scenario": "arnold_tongue"})"), "conflict"));
  }
  SUBCASE("sweep limits") {
    const auto e = config_error(R"({"scenario": "custom", "params": {"gamma1_plus_khz": 1, "gamma2_khz": 1},
      "initial_state": {"kind": "vacuum"}, "steady": true,
      "sweep": [{"name": "omega", "values_per_s": [1]}, {"name": "delta", "values_per_s": [1]},
                {"name": "theta", "values_rad": [1]}]})");
    CHECK(contains(e, "two sweep axes"));
  }
  SUBCASE("timing and engines") {
    CHECK(contains(config_error(R"({"preset": "fig2", "timing": {"tau_idle_us": 100}})"), "conflict"));
    CHECK(contains(config_error(R"({"scenario": "custom", "params": {"gamma1_plus_khz": 1, "gamma2_khz": 1},
      "initial_state": {"kind": "vacuum"}, "steady": true,
      "timing": {"tau_bsb_us": 100, "tau_2rsb_us": 150, "period_us": 200}})"), "period"));
    CHECK(contains(config_error(R"({"preset": "figS2", "engine": "trotter_rwa"})"), "timing"));
    CHECK(contains(config_error(R"({"preset": "fig2", "engine": "trotter_rwa", "sample_times_us": [0, 300]})"),
                   "conflict"));
    CHECK(contains(config_error(R"({"preset": "fig2", "engine": "warp"})"), "warp"));
    CHECK(contains(config_error("[1, 2"), "parse"));
  }
}

TEST_CASE("preset dimensionless ratios") {
  const auto fig2 = preset_config("fig2").params;
  CHECK(ratio_error(fig2.gamma2 / (fig2.gamma1_plus - fig2.gamma1_minus), 0.56) < 0.03);
  const auto fig3a = preset_config("fig3a").params;
  CHECK(ratio_error(fig3a.gamma2 / fig3a.gamma1_plus, 5.2) < 0.03);
  CHECK(ratio_error(fig3a.omega / fig3a.gamma1_plus, 3.5) < 0.03);
  const auto fig3b = preset_config("fig3b").params;
  CHECK(ratio_error(fig3b.gamma2 / fig3b.gamma1_plus, 5.7) < 0.03);
  CHECK(ratio_error(fig3b.omega / fig3b.gamma1_plus, 4.7) < 0.03);
  const auto fig3c = preset_config("fig3c");
  const double expected_c[] = {0.47, 1.2, 2.4, 3.6, 4.7};
  for (int k = 0; k < 5; ++k)
    CHECK(ratio_error(fig3c.sweep[0].values[static_cast<std::size_t>(k + 1)] / fig3c.params.gamma1_plus,
                      expected_c[k]) < 0.03);
  const auto deep = preset_config("fig4a_deep").params;
  CHECK(ratio_error(deep.gamma2 / deep.gamma1_plus, 7.9) < 0.03);
  const auto quantum = preset_config("fig4a_quantum").params;
  CHECK(ratio_error(quantum.gamma2 / quantum.gamma1_plus, 1.4) < 0.03);
  const auto semi = preset_config("fig4a_semiclassical").params;
  CHECK(ratio_error(semi.gamma2 / semi.gamma1_plus, 0.06) < 0.03);
  const auto sq = preset_config("fig4bc");
  CHECK(ratio_error(sq.params.gamma2 / sq.params.gamma1_plus, 4.4) < 0.03);
  CHECK(ratio_error(sq.params.omega / sq.params.gamma1_plus, 1.2) < 0.03);
  CHECK(ratio_error(sq.sweep[0].values[2] / sq.params.gamma1_plus, 1.7) < 0.03);
}

// gamma2 / gamma1_plus = 1.48 / 0.28 = 5.29 for the tongue rates, against a reference ratio of 4.7
TEST_CASE("Arnold tongue preset ratio is 4.7" * doctest::should_fail()) {
  const auto p = preset_config("fig3d").params;
  CHECK(ratio_error(p.gamma2 / p.gamma1_plus, 4.7) < 0.03);
}

TEST_CASE("unit conversion") {
  const auto c = load_config(R"({"preset": "fig2", "params": {"gamma2_per_s": 1110, "gamma_h_khz": 0.09}})");
  CHECK(c.params.gamma2 == 1110.0);
  const auto d = load_config(R"({"scenario": "custom", "params": {"gamma1_plus_per_s": 100, "gamma2_khz": 0.2,
      "omega_hz_over_2pi": 10, "delta_per_s": 3}, "initial_state": {"kind": "vacuum"}, "steady": true})");
  CHECK(d.params.omega == doctest::Approx(2 * kPi * 10).epsilon(1e-15));
  CHECK(d.params.delta == 3.0);
  CHECK(d.params.gamma2 == doctest::Approx(200.0));
}

TEST_CASE("sweep points") {
  const auto c = preset_config("fig3d");
  const auto points = sweep_points(c);
  REQUIRE(points.size() == 20);
  CHECK(points[0] == std::vector<double>{c.sweep[0].values[0], c.sweep[1].values[0]});
  CHECK(points[1] == std::vector<double>{c.sweep[0].values[0], c.sweep[1].values[1]});
  CHECK(points[5][0] == c.sweep[0].values[1]);
  CHECK(sweep_points(preset_config("fig2")).size() == 1);
}

TEST_CASE("Arnold tongue run") {
  const auto c = preset_config("fig3d");
  const auto table = run(c);
  REQUIRE(table.rows.size() == 20);
  CHECK(table.failed_points == 0);
  for (const auto& row : table.rows) CHECK(std::isinf(row.time));

  const auto summary = arnold_tongue_summary(table);
  REQUIRE(summary.s.rows() == 4);
  REQUIRE(summary.s.cols() == 5);
  for (int i = 0; i + 1 < 4; ++i) CHECK(summary.s(i + 1, 2) > summary.s(i, 2));
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 2; ++j) CHECK(std::abs(summary.s(i, j) - summary.s(i, 4 - j)) < 1e-6);
    CHECK(summary.s(i, 1) <= summary.s(i, 2) + 1e-3);
    CHECK(summary.s(i, 0) <= summary.s(i, 1) + 1e-3);
  }
  for (const auto& pt : summary.contour) {
    CHECK(pt.delta >= summary.delta_axis.front());
    CHECK(pt.delta <= summary.delta_axis.back());
  }

  SUBCASE("missing and failed points are listed") {
    ResultTable partial = table;
    partial.rows.erase(partial.rows.begin() + 7);
    partial.rows[3].status = "error: injected";
    try {
      arnold_tongue_summary(partial);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(contains(msg, "missing"));
      CHECK(contains(msg, "failed"));
    }
  }
  SUBCASE("worker count does not change the output") {
    const auto parallel = run(c, RunOptions{8, {}});
    CHECK(csv_text(parallel) == csv_text(table));
  }
}

TEST_CASE("zero drive keeps phase symmetry") {
  const auto c = load_config(R"({"scenario": "arnold_tongue",
      "params": {"gamma1_plus_khz": 0.28, "gamma1_minus_khz": 0.12, "gamma_h_khz": 0.12, "gamma2_khz": 1.48,
                 "drive_phase_rad": 1.5707963267948966},
      "initial_state": {"kind": "vacuum"}, "steady": true,
      "sweep": [{"name": "omega", "values_per_s": [0]},
                {"name": "delta", "values_hz_over_2pi": [-272, -136, 0, 136, 272]}]})");
  const auto table = run(c);
  REQUIRE(table.rows.size() == 5);
  for (const auto& row : table.rows) {
    CHECK(row.s <= 1e-4);
    CHECK_FALSE(row.mean_phase.has_value());
  }
}

TEST_CASE("limit-cycle run emits one row per sample time") {
  const auto dir = scratch_dir("fig2");
  auto c = preset_config("fig2");
  c.output.wigner = true;
  const auto table = run(c, RunOptions{1, dir.string()});
  REQUIRE(table.rows.size() == 4);
  CHECK(table.rows.back().s <= 0.05);
  for (const auto& row : table.rows) {
    REQUIRE_FALSE(row.wigner_file.empty());
    const auto dump = read_wigner_file((dir / row.wigner_file).string());
    CHECK(dump.grid.values.rows() == c.grid.n_r);
    bool has_rc = false;
    for (const auto& [k, v] : dump.meta) has_rc |= k == "r_c";
    CHECK(has_rc);
  }
  fs::remove_all(dir);
}

TEST_CASE("failing points become error rows") {
  auto c = load_config(R"({"preset": "fig2", "sweep": [{"name": "n_max", "values": [4, 30]}]})");
  const auto table = run(c);
  REQUIRE(table.rows.size() == 8);
  CHECK(table.failed_points == 1);
  CHECK_FALSE(table.all_failed());
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(table.rows[k].failed());
    CHECK(std::isnan(table.rows[k].s));
  }
  for (std::size_t k = 4; k < 8; ++k) CHECK_FALSE(table.rows[k].failed());
  const auto back = [&] {
    std::istringstream in(csv_text(table));
    return read_csv(in);
  }();
  CHECK(back.failed_points == 1);
}

TEST_CASE("CSV round trip") {
  ResultTable table;
  table.axes = {"omega", "gamma1_minus"};
  ResultRow a;
  a.coords = {2 * kPi * 43.0, 120.0};
  a.time = kInf;
  a.s = 0.1 + 0.2;
  a.mean_phase = kPi / 2 - 1e-17;
  a.re_a = -0.0;
  a.im_a = 1e-310;
  a.n_mean = 1.0 / 3.0;
  a.purity = 0.999999999999;
  a.status = "warn: tail 1e-6, \"quoted\"; ok";
  a.wigner_file = "wigner_p0000_t000.txt";
  ResultRow b = a;
  b.coords[1] = 270.0;
  b.mean_phase.reset();
  b.s = b.re_a = b.im_a = b.n_mean = b.purity = kNaN;
  b.status = "error: line one\nline two";
  b.wigner_file.clear();
  table.rows = {a, b};
  table.total_points = 2;
  table.failed_points = 1;

  const std::string text = csv_text(table);
  CHECK(text.substr(0, text.find('\n')) ==
        "omega_rad_per_s,gamma1_minus_per_s,time_s,S,mean_phase_rad,re_a,im_a,n_mean,purity,status,wigner_file");
  std::istringstream in(text);
  const auto back = read_csv(in);
  CHECK(back.axes == table.axes);
  REQUIRE(back.rows.size() == 2);
  CHECK(identical(back.rows[0], a));
  CHECK(identical(back.rows[1], b));
  CHECK(back.failed_points == 1);
  CHECK(back.total_points == 2);
  CHECK(csv_text(back) == text);

  std::istringstream bad("omega_rad_per_s,time_s\n1,2\n");
  CHECK_THROWS_AS(read_csv(bad), ConfigError);
}

TEST_CASE("emitted preset CSV round-trips exactly") {
  const auto table = run(preset_config("fig3b"));
  const auto dir = scratch_dir("csv");
  const auto path = (dir / "fig3b.csv").string();
  write_csv_file(table, path);
  const auto back = read_csv_file(path);
  REQUIRE(back.rows.size() == table.rows.size());
  for (std::size_t k = 0; k < table.rows.size(); ++k) CHECK(identical(back.rows[k], table.rows[k]));
  fs::remove_all(dir);
}

TEST_CASE("Wigner text round trip") {
  WignerDump dump;
  dump.grid = wigner_polar(coherent_state(FockTruncation{}, Complex(0.4, 1.1)), 3.0, 7, 12);
  dump.meta = {{"config", "demo run"}, {"time_s", "0.004"}};
  std::ostringstream out;
  write_wigner_text(dump, out);
  CHECK(out.str().rfind("# qvdp-wigner 1\n", 0) == 0);
  std::istringstream in(out.str());
  const auto back = read_wigner_text(in);
  CHECK(back.grid.r_axis == dump.grid.r_axis);
  CHECK(back.grid.phi_axis == dump.grid.phi_axis);
  CHECK((back.grid.values - dump.grid.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.meta == dump.meta);

  std::istringstream bad("# qvdp-wigner 2\n");
  CHECK_THROWS_AS(read_wigner_text(bad), ConfigError);
}

TEST_CASE("golden fixtures parse with the expected cardinalities") {
  const fs::path fixtures = QVDP_FIXTURE_DIR;
  const auto tongue = read_csv_file((fixtures / "tongue.csv").string());
  CHECK(tongue.rows.size() == 20);
  CHECK(tongue.axes == std::vector<std::string>{"omega", "delta"});
  CHECK(arnold_tongue_summary(tongue).s.size() == 20);
  const auto cycle = read_csv_file((fixtures / "limit_cycle.csv").string());
  CHECK(cycle.rows.size() == 4);
  for (const auto& row : cycle.rows) {
    const auto dump = read_wigner_file((fixtures / row.wigner_file).string());
    CHECK(dump.grid.values.rows() == 21);
    CHECK(dump.grid.values.cols() == 24);
  }
}

TEST_CASE("phase-space grid resolution does not move S") {
  for (auto name : {"fig3b", "fig4bc"}) {
    CAPTURE(name);
    auto c = preset_config(name);
    const auto coarse = run(c);
    c.grid = GridSpec{c.grid.r_max, 2 * c.grid.n_r, 2 * c.grid.n_phi};
    const auto fine = run(c);
    REQUIRE(fine.rows.size() == coarse.rows.size());
    for (std::size_t k = 0; k < fine.rows.size(); ++k) CHECK(std::abs(fine.rows[k].s - coarse.rows[k].s) < 1e-3);
  }
}

TEST_CASE("command line exit codes") {
  const auto dir = scratch_dir("cli");
  const auto write = [&](const std::string& file, const std::string& text) {
    std::ofstream(dir / file) << text;
    return (dir / file).string();
  };
  CHECK(run_cli("preset list") == 0);
  CHECK(run_cli("preset show fig4bc") == 0);
  CHECK(run_cli("preset show nope") == 1);
  CHECK(run_cli("run " + write("bad.json", R"({"preset": "fig2", "gamma3": 1})")) == 1);
  CHECK(run_cli("run " + (dir / "missing.json").string()) == 1);
  const auto ok = write("ok.json", R"({"preset": "fig3c", "output": {"csv": "out.csv"}})");
  CHECK(run_cli("run " + ok + " --workers 2 --out " + (dir / "ok").string()) == 0);
  CHECK(fs::exists(dir / "ok" / "out.csv"));
  CHECK(read_csv_file((dir / "ok" / "out.csv").string()).rows.size() == 6);
  const auto doomed = write("doomed.json", R"({"preset": "fig2", "params": {"n_max": 3}})");
  CHECK(run_cli("run " + doomed + " --out " + (dir / "doomed").string()) == 2);
  CHECK(run_cli("run " + ok + " --engine warp") != 0);
  fs::remove_all(dir);
}
