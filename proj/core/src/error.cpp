#include "tabloop/error.h"

namespace tabloop {

const char* errorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kMalformedWait: return "MalformedWait";
    case ErrorCode::kNoTimingInfo: return "NoTimingInfo";
    case ErrorCode::kUnsupportedDenominator: return "UnsupportedDenominator";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kUnreadableFile: return "UnreadableFile";
    case ErrorCode::kTruncatedBudget: return "TruncatedBudget";
    case ErrorCode::kSourceFailure: return "SourceFailure";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoFailure: return "IoFailure";
  }
  return "UnknownError";
}

}  // namespace tabloop
