#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fbg {

enum class ErrorCode {
  kNoSeeds,
  kEmptyFigure,
  kNumericalInput,
  kDuplicateBlock,
  kDimensionMismatch,
  kConfigMismatch,
  kMissingFile,
  kDuplicateId,
  kBadCategoryTable,
  kBadManifest,
  kEmptySplit,
  kInvalidArgument,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (tests, the CLI) can branch on the kind rather than on the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The text after the "Code: " prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace fbg
