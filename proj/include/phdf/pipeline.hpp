#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "phdf/config.hpp"
#include "phdf/io.hpp"

namespace phdf {

struct CommandResult {
  io::Json summary;
  bool verdict_ok = true;  // false: the run completed but a verdict failed
};

/// Subcommand names accepted by run_command.
const std::vector<std::string>& command_names();

/// Runs one subcommand, writing its CSV tables and summary.json under the
/// configured output directory. Outputs depend only on the config.
CommandResult run_command(std::string_view name, const RunConfig& config);

}  // namespace phdf
