#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "report.hpp"

namespace cli {

const std::vector<std::string>& subcommands();

/// Runs one pipeline entirely in memory. Throws bragg::ConfigError for
/// unusable settings and bragg::NumericalError for numerical failures.
RunOutput run_command(const std::string& command, const ExperimentConfig& config, int threads);

}  // namespace cli
