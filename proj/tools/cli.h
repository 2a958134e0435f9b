#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aslpv::cli {

enum ExitCode : int { kPass = 0, kSemanticFailure = 1, kUsageError = 2 };

/// Environment variable consulted for the default seed.
inline constexpr const char* kSeedEnv = "ASLPV_SEED";
inline constexpr unsigned long long kFallbackSeed = 42;

/// Runs one command line; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace aslpv::cli
