#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace racer::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kInfeasibleAlpha = 3,
  kPipelineMismatch = 4,
};

/// Entry point shared by the racer binary and the tests. args[0] is the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace racer::cli
