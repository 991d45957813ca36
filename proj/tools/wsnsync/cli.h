#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wsnsync::cli {

// Exit codes shared by every command.
enum ExitCode : int {
  kOk = 0,
  kVerifyFailed = 1,  // replay: rebuilt store differs from the expected one
  kUsage = 2,         // bad arguments or scenario
  kHoles = 3,         // sync finished but some records exist in neither store
  kIoError = 4,       // unreadable/unwritable files, malformed input, conflicts
};

// Dispatches simulate / serve / reconcile / analyze / replay / preset.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wsnsync::cli
