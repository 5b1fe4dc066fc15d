#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace plume::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kArtifact = 3, kTrainAbort = 4, kReplayMismatch = 5 };

/// Entry point of the `plume` tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace plume::cli
