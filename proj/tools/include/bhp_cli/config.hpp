#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bhp/point_process.hpp"

namespace bhp::cli {

struct ThetaKrSettings {
  std::vector<std::uint32_t> k;
  double window = 60.0;
  std::string estimator = "window";  ///< window | mass_transport | both
};

struct SubcriticalSettings {
  std::vector<std::uint32_t> k;
  double window = 160.0;
  double palm_window = 40.0;
  std::size_t palm_reps = 0;  ///< 0 = mc.n_reps
  std::vector<double> decay_r;
  double decay_window = 100.0;
  double slack_sigmas = 3.0;
};

struct ThetaSettings {
  double window = 60.0;
  std::vector<std::size_t> coincidence_m;
  double separation = 10.0;
};

struct MuSettings {
  std::vector<std::uint32_t> n;
  double aspect = 0.5;
  std::vector<double> lambdas;  ///< empty = model.lambda only
};

struct LimitLawSettings {
  std::vector<double> r;
  std::optional<double> theta;
  std::optional<double> mu;
  double theta_window = 60.0;
  std::size_t theta_reps = 200;
  std::uint32_t mu_n = 40;
  std::size_t mu_reps = 100;
  double mu_aspect = 0.5;
};

struct RenormSettings {
  double n = 50.0;
  std::optional<double> epsilon;  ///< default 2 (log lambda / lambda)^(1/d)
  long margin = 6;
  std::vector<long> tail_m;
  long tail_margin = 3;
  std::size_t tail_reps = 0;  ///< 0 = mc.n_reps
};

struct QBoundSettings {
  std::vector<double> lambdas;
  std::vector<double> epsilons;  ///< empty = the default epsilon per lambda
};

using ExperimentSettings = std::variant<ThetaKrSettings, SubcriticalSettings, ThetaSettings, MuSettings, LimitLawSettings, RenormSettings, QBoundSettings>;

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  int threads = 1;
  std::filesystem::path out = "results";
  ModelParams model;
  std::size_t n_reps = 0;
  ExperimentSettings settings;
  nlohmann::json source;  ///< normalised config, as written to the manifest
};

/// TOML or JSON text; a run manifest (object with a "config" member) is
/// accepted and its config replayed.
nlohmann::json load_config_file(const std::filesystem::path& path);

/// Validates every key and value. Unknown keys are configuration errors
/// naming the key; infeasible windows name the truncation rule.
ExperimentConfig parse_config(const nlohmann::json& doc);

}  // namespace bhp::cli
