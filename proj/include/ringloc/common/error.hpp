#ifndef RINGLOC_COMMON_ERROR_HPP
#define RINGLOC_COMMON_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace ringloc {

enum class ErrorCode {
  kFileNotFound,
  kFormatError,
  kEmptyCloud,
  kEmptyAfterFilter,
  kNonUnitQuaternion,
  kTooFewPoints,
  kNonSquareInput,
  kDegenerateConstantInput,
  kShapeMismatch,
  kEmptyIndex,
  kNoCorrespondences,
  kEmptyOutcomes,
  kLengthMismatch,
  kEmptyScan,
  kIoError,
  kConfigError,
  kConfigMismatch,
  kInvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Every failure surfaced by the library carries one of the codes above so
/// callers (the CLI in particular) can map them to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ringloc

#endif  // RINGLOC_COMMON_ERROR_HPP
