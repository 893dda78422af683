#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace salsaloc::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigError = 2,
    kDataError = 3,
    kNumericError = 4,
};

/// Runs one command line (args[0] is the program name). Normal output goes to
/// `out`; failures print a single JSON object line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::uint64_t fnv1a(std::span<const char> bytes);
std::string hex64(std::uint64_t v);

}  // namespace salsaloc::cli
