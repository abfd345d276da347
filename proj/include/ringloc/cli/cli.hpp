#ifndef RINGLOC_CLI_CLI_HPP
#define RINGLOC_CLI_CLI_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ringloc/localization/localization.hpp"

namespace ringloc::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  ///< selfcheck property failure or a runtime stage failure
  kExitUsage = 2,    ///< bad arguments, unreadable inputs, config errors, config mismatch
  kExitNoMatch = 3,
};

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

nlohmann::json pose_to_json(const Pose3& p);
Pose3 pose_from_json(const nlohmann::json& j);

/// Machine-readable localize output. Doubles are stored unrounded.
nlohmann::json result_to_json(const LocalizationResult& r, std::optional<std::int64_t> query_id,
                              const std::string& query_path, const std::string& index_dir);

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fault names understood by run_selfcheck; empty means none.
inline constexpr const char* kFaultShiftConvention = "shift-convention";

/// Runs the invariant suite. `fault` deliberately breaks one convention so the
/// suite can be seen to catch it. Throws InvalidArgument for unknown faults.
std::vector<PropertyResult> run_selfcheck(const std::string& fault, std::uint64_t seed);

}  // namespace ringloc::cli

#endif  // RINGLOC_CLI_CLI_HPP
