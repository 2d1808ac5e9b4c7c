#pragma once

#include <map>
#include <string>
#include <vector>

#include "e1lab/record.hpp"
#include "e1lab/scenario.hpp"

namespace e1lab {

/// One subcommand's record plus the CSV files it emits (name -> contents).
struct CommandOutput {
    ResultRecord record;
    std::map<std::string, std::string> files;
};

struct RunOptions {
    bool full_check = true;  ///< --check-level full
};

const std::vector<std::string>& command_names();

/// One-line help text for a command name.
std::string command_description(const std::string& command);

/// venv, envelope, energy, dist, geodesic, ray, cauchy or check. Potentials
/// named "u" and "v" default to seeded random potentials when absent.
CommandOutput run_command(const std::string& command, const Scenario& s, const RunOptions& opt = {});

/// Writes result.json (with digest) and the CSV files into `dir`, creating it.
void write_output(const CommandOutput& out, const std::string& dir);

}  // namespace e1lab
