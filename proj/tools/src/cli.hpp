#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace radsearch::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kNoPath = 3,  // also mission abort
  kIoError = 4,
};

/// `args` excludes the program name. Errors go to `err` as one JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace radsearch::cli
