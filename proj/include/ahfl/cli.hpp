#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ahfl/config.hpp"
#include "ahfl/io.hpp"

namespace ahfl::cli {

/// Process exit codes. Stable; scripts may rely on them.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,           ///< bad command line or I/O failure
  kParseError = 2,      ///< config file could not be parsed
  kValidationError = 3, ///< config parsed but violates a constraint
  kDivergence = 4,      ///< training produced non-finite values
  kToleranceFailure = 5,///< empirical result outside its declared tolerance
  kMissingRuns = 6,     ///< figure inputs absent and computation disabled
};

/// Environment variable consulted when --out is not given.
inline constexpr const char* kOutDirEnv = "AHFL_OUT_DIR";

/// Closed-form timing and staleness figures for one configuration, as
/// `key: value` rows.
io::KeyValues analyze_report(const TopologyConfig& top, const TimingConfig& tc);

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ahfl::cli
