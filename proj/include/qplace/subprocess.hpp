#pragma once

#include <optional>
#include <string>

namespace qplace {

struct SubprocessResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string out;
  std::string err;
};

// Runs a shell command, feeding stdin_data and capturing stdout/stderr.
// Kills the process when timeout_ms elapses.
SubprocessResult run_subprocess(const std::string& command, const std::string& stdin_data,
                                std::optional<int> timeout_ms);

}  // namespace qplace
