#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qvdp/experiments/io.hpp"
#include "qvdp/experiments/presets.hpp"
#include "qvdp/experiments/runner.hpp"

namespace ex = qvdp::experiments;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitAllFailed = 2;

ex::ExperimentConfig load_with_engine(const std::string& path, const std::string& engine) {
  std::ifstream in(path);
  if (!in) throw qvdp::ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  if (engine.empty()) return ex::load_config(text.str());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw qvdp::ConfigError(std::string("config does not parse: ") + e.what());
  }
  if (!doc.is_object()) throw qvdp::ConfigError("config must be a JSON object");
  doc["engine"] = engine;
  return ex::load_config(doc.dump());
}

int run_command(const std::string& path, int workers, const std::string& out_dir, const std::string& engine) {
  ex::ExperimentConfig config;
  try {
    config = load_with_engine(path, engine);
  } catch (const qvdp::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  for (const auto& note : config.notes) std::cerr << "note: " << note << "\n";

  const ex::ResultTable table = ex::run(config, {workers, out_dir});
  std::filesystem::create_directories(out_dir);
  const std::string csv = (std::filesystem::path(out_dir) / config.output.csv).string();
  try {
    ex::write_csv_file(table, csv);
  } catch (const qvdp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  for (const auto& row : table.rows)
    if (row.status != "ok") std::cerr << row.status << "\n";
  std::cout << config.name << ": " << table.rows.size() << " rows, " << table.failed_points << " of "
            << table.total_points << " points failed, wrote " << csv << "\n";
  return table.all_failed() ? kExitAllFailed : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum van der Pol oscillator experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a config file and write CSV");
  std::string config_path, out_dir = ".", engine;
  int workers = 1;
  run->add_option("config", config_path, "config file (JSON)")->required();
  run->add_option("--workers", workers, "concurrent sweep points")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--engine", engine, "engine override")
      ->check(CLI::IsMember({"exact", "trotter_rwa", "trotter_full"}));

  auto* preset = app.add_subcommand("preset", "list or show built-in presets");
  preset->require_subcommand(1);
  preset->add_subcommand("list", "list preset names");
  auto* show = preset->add_subcommand("show", "print a resolved preset with units");
  std::string preset_name;
  show->add_option("name", preset_name, "preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (run->parsed()) return run_command(config_path, workers, out_dir, engine);
  if (preset->got_subcommand("list")) {
    for (auto name : ex::preset_names()) std::cout << name << "\n";
    return kExitOk;
  }
  try {
    std::cout << ex::describe(ex::preset_config(preset_name));
  } catch (const qvdp::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
