#include <iostream>

#include <CLI11.hpp>

#include "bhp/error.hpp"
#include "bhp_cli/config.hpp"
#include "bhp_cli/runner.hpp"

int main(int argc, char** argv) {
  using namespace bhp::cli;
  CLI::App app{"bounded-hop percolation experiment runner"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  app.add_option("--config", config_path, "experiment config (.toml, .json, or a run manifest)")->required();
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--threads", threads, "worker threads; never changes results")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "output directory");
  app.set_version_flag("--version", kVersion);
  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json doc = load_config_file(config_path);
    if (seed) doc["seed"] = *seed;
    if (threads) doc["threads"] = *threads;
    if (out) doc["out"] = *out;
    const ExperimentConfig cfg = parse_config(doc);
    return run_and_write(cfg, std::cout, std::cerr);
  } catch (const bhp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    const bool invalid = e.kind() == bhp::ErrorKind::parameter || e.kind() == bhp::ErrorKind::configuration;
    const int code = invalid ? kInvalidConfig : kPrecondition;
    std::cout << nlohmann::json{{"status", "error"}, {"error", e.what()}, {"exit_code", code}}.dump() << std::endl;
    return code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    std::cout << nlohmann::json{{"status", "error"}, {"error", e.what()}, {"exit_code", kInternal}}.dump() << std::endl;
    return kInternal;
  }
}
