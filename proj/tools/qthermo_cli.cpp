// qthermo-cli: run <config> --out <dir> [--seed N] [--override key=value]...
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qthermo/cli/scenario.hpp"

namespace fs = std::filesystem;
using qthermo::cli::json;

namespace {

json readConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qthermo::cli::ConfigError(path + ": cannot open config");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw qthermo::cli::ConfigError(path + ": " + e.what());
  }
}

void writeFile(const fs::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  out << body;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open quantum system thermodynamics scenarios"};
  app.set_version_flag("--version", std::string(qthermo::kVersion));
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario config and write CSV results plus manifest.json");
  std::string configPath, outDir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  run->add_option("config", configPath, "JSON config or a manifest from an earlier run")->required();
  run->add_option("--out", outDir, "Output directory")->required();
  run->add_option("--seed", seed, "Seed; takes precedence over the config");
  run->add_option("--override", overrides, "Dotted key=value applied to the config")->take_all();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    json cfg = qthermo::cli::unwrapManifest(readConfig(configPath));
    for (const auto& o : overrides) qthermo::cli::applyOverride(cfg, o);
    const qthermo::cli::RunResult r = qthermo::cli::runScenario(cfg, seed);
    fs::create_directories(outDir);
    for (const auto& [name, body] : r.files) writeFile(fs::path(outDir) / name, body);
    writeFile(fs::path(outDir) / "manifest.json", r.manifest.dump(2) + "\n");
    std::cout << r.scenario << ": wrote";
    for (const auto& [name, body] : r.files) std::cout << ' ' << name;
    std::cout << " manifest.json to " << outDir << '\n';
    return 0;
  } catch (const qthermo::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const qthermo::cli::ScenarioError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
