#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bhp_cli/config.hpp"

namespace bhp::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kInvalidConfig = 2,
  kPrecondition = 3,  ///< divergence, enlarge-box, regime or giant checks
  kCheckFailed = 4,   ///< certified-bound or bound-violation failure
  kInternal = 5,
};

/// One CSV row; empty optionals print as empty fields.
struct CsvRow {
  std::string experiment;
  int d = 2;
  double lambda = 0.0;
  double lambda_prime = 0.0;
  std::optional<double> r;
  std::optional<double> k_or_a;
  std::optional<double> estimate;
  std::optional<double> std_error;
  std::optional<double> ci_lo;
  std::optional<double> ci_hi;
  std::optional<std::size_t> n_reps;
  nlohmann::json extra = nlohmann::json::object();
};

inline constexpr const char* kCsvHeader =
    "experiment,d,lambda,lambda_prime,r,k_or_a,estimate,std_error,ci_lo,ci_hi,n_reps,extra";

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows);

struct RunOutcome {
  int exit_code = kOk;
  std::vector<CsvRow> rows;
  nlohmann::json summary = nlohmann::json::object();  ///< experiment-specific status fields
};

/// Runs the experiment; logs go to `log`. Library errors propagate.
RunOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& log);

/// Full CLI flow: run, write <out>/results.csv and <out>/manifest.json, and
/// return the exit code. The one-line JSON summary goes to `stdout_line`.
int run_and_write(const ExperimentConfig& cfg, std::ostream& stdout_line, std::ostream& log);

}  // namespace bhp::cli
