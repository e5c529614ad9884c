#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bmc {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes of the command line. Errors also print a JSON envelope
/// {"error": {"code", "message", "exit_code"}} on stdout.
enum ExitCode : int {
    kExitOk = 0,
    kExitIo = 1,
    kExitUsage = 2,
    kExitFormat = 3,
    kExitVersion = 4,
    kExitDegenerate = 5,
    kExitTraining = 6,
    kExitSpec = 7,
};

/// Runs one invocation; `args` excludes the program name. Reports go to
/// `out` unless a command writes them to a file.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 16 hex digits of FNV-1a over the bytes.
std::string digest_hex(const void* data, std::size_t size);

}  // namespace bmc
