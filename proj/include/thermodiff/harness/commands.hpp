#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace thermodiff::harness {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitComputationFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point behind the `thermodiff` executable. `args` excludes the
/// program name; artifacts go to `out` unless --output names a file.
/// Diagnostics and warnings go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const std::optional<std::string>& seed_env);

}  // namespace thermodiff::harness
