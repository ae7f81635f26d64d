#pragma once

// Run configuration and the four front-end commands. Each command returns
// its exit code and the rendered report; writing it out is the caller's job.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finsler/identity_checks.hpp"
#include "finsler/zoo.hpp"

namespace finsler {

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
  std::string command;
  std::optional<std::string> metric;
  std::optional<std::string> metric_expr;
  int dim{3};
  std::string volume{"bh"};  // lebesgue | bh | auto | expr:<sigma(x)>
  TextParams params;
  int samples{50};      // fibre points per base point
  int base_points{5};
  std::uint64_t seed{42};
  Tolerances tolerances;  // overrides of default_tolerances()
  std::string out;        // empty: standard output
  std::string format{"json"};
  std::vector<double> x, y;  // curvature only
  unsigned threads{0};
};

/// Tags accepted by --tol-<tag>.
const std::vector<std::string>& tolerance_tags();

/// Overlays the keys of a JSON config document onto `cfg`. Keys mirror the
/// long flag names with '-' written as '_' (metric_expr, base_points, ...);
/// "params" and "tolerances" are objects. Unknown keys are errors.
void merge_config_json(RunConfig& cfg, std::string_view text);

/// Throws InvalidInput whose message starts with the offending field.
void validate(const RunConfig& cfg);

VolumeForm volume_from_config(const RunConfig& cfg);
MetricModel model_from_config(const RunConfig& cfg);

struct CommandResult {
  int exit_code{0};
  std::string output;      // report text
  std::string diagnostic;  // for standard error
};

CommandResult cmd_check(const RunConfig& cfg);
CommandResult cmd_curvature(const RunConfig& cfg);
CommandResult cmd_audit(const RunConfig& cfg);
CommandResult cmd_zoo(const RunConfig& cfg);

/// Validates, dispatches on cfg.command and maps input errors to exit code 2.
CommandResult run_command(const RunConfig& cfg);

}  // namespace finsler
