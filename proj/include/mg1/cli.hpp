#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace mg1 {

// Command-line surface: validate models, solve for the stationary prefix,
// analyze tail asymptotics, emit prediction-vs-exact comparison tables, and
// report the support structure of the fundamental matrices.

enum class Command { Validate, Solve, Analyze, Compare, Structure };

enum class OutputFormat { Human, Csv };

struct RunConfig {
    Command command = Command::Validate;
    std::string model_path;
    int levels = 200;                          // >= 1
    std::map<std::string, double> tolerances;  // known names only
    std::string output;                        // empty = standard output
    OutputFormat format = OutputFormat::Human;
};

// Parses command-line arguments (without the program name).  Throws
// ParseError for malformed flags, unknown tolerance names, or levels < 1.
RunConfig parse_args(const std::vector<std::string>& args);

// Executes the configured command, writing the report to `out` unless the
// config redirects to a file.  Exceptions escape to the caller.
void run(const RunConfig& config, std::ostream& out);

// Full entry point: parse, run, and map errors to exit statuses
// (1 = input/validation error, 2 = numerical failure, 0 = success).
int cli_main(int argc, char** argv);

}  // namespace mg1
