#pragma once

#include <stdexcept>
#include <string>

namespace tabloop {

enum class ErrorCode {
  kEmptyInput,
  kMalformedWait,
  kNoTimingInfo,
  kUnsupportedDenominator,
  kEmptyCorpus,
  kUnreadableFile,
  kTruncatedBudget,
  kSourceFailure,
  kInvalidArgument,
  kIoFailure,
};

const char* errorCodeName(ErrorCode code);

/// Exception type carrying a stable error code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(errorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tabloop
