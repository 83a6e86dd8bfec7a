#ifndef XOVER_ERROR_H_
#define XOVER_ERROR_H_

#include <stdexcept>
#include <string>

namespace xover {

enum class ErrorCode {
  kParseError,
  kDuplicateId,
  kUnknownCondition,
  kCrossContentVote,
  kEmptyPair,
  kAllPairsSingleton,
  kDisconnectedGraph,
  kNonConvergence,
  kTooFewConditions,
  kTooFewPoints,
  kNoDomainOverlap,
  kMissingCrossover,
  kRangeOutsideDomain,
  kOutOfScale,
  kDegenerateInput,
  kInsufficientOverlap,
  kInvalidArgument,
  kIoError,
};

const char* ErrorCodeName(ErrorCode code);

// Every recoverable failure in the library is reported through this type;
// callers switch on code() rather than parsing what().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace xover

#endif  // XOVER_ERROR_H_
