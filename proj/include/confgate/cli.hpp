#pragma once

#include <string>
#include <vector>

namespace confgate {

// Runs one CLI invocation (args exclude the program name). Returns the
// process exit code; failures print one machine-readable JSON object to
// stderr: {"error": {"type": ..., "message": ...}}.
int run_cli(const std::vector<std::string>& args);

}  // namespace confgate
