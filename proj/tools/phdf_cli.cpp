#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "phdf/config.hpp"
#include "phdf/error.hpp"
#include "phdf/pipeline.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kVerdictFailure = 1;
constexpr int kUsage = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phantom distribution functions for maxima of stationary sequences"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::uint64_t> replicas;
  std::optional<std::uint64_t> workers;
  bool print_defaults = false;
  app.add_option("--config", config_file, "INI run configuration");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out, "output directory");
  app.add_option("--replicas", replicas, "Monte Carlo replicas");
  app.add_option("--workers", workers, "worker threads");
  app.add_flag("--print-defaults", print_defaults, "print the default configuration and exit");
  for (const auto& name : phdf::command_names()) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (print_defaults) {
      std::cout << phdf::RunConfig::defaults().to_ini();
      return kOk;
    }
    const auto chosen = app.get_subcommands();
    if (chosen.empty()) {
      std::cerr << "usage: choose a subcommand\n" << app.help();
      return kUsage;
    }
    const std::string command = chosen.front()->get_name();
    phdf::RunConfig cfg = config_file.empty() ? phdf::RunConfig::defaults() : phdf::RunConfig::load(config_file);
    if (seed) cfg.set("run.seed", std::to_string(*seed));
    if (out) cfg.set("run.out", *out);
    if (replicas) cfg.set("run.replicas", std::to_string(*replicas));
    if (workers) cfg.set("run.workers", std::to_string(*workers));

    const auto t0 = std::chrono::steady_clock::now();
    const auto result = phdf::run_command(command, cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    phdf::io::write_json(std::filesystem::path(cfg.text("run.out")) / "timing.json",
                         {{"command", command}, {"wall_clock_seconds", seconds}});
    if (result.summary.contains("verdict")) std::cout << result.summary["verdict"].get<std::string>() << "\n";
    if (result.summary.contains("notes")) {
      for (const auto& n : result.summary["notes"]) std::cerr << "note: " << n.get<std::string>() << "\n";
    }
    if (result.summary.contains("rate_check")) std::cout << result.summary["rate_check"].dump() << "\n";
    if (result.summary.contains("criteria")) {
      for (const auto& c : result.summary["criteria"]) {
        std::cout << "C" << c["id"].get<int>() << " " << (c["pass"].get<bool>() ? "PASS" : "FAIL") << " "
                  << c["name"].get<std::string>() << ": " << c["detail"].get<std::string>() << "\n";
      }
    }
    return result.verdict_ok ? kOk : kVerdictFailure;
  } catch (const phdf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
