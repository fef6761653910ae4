#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ghr {

enum class ErrorCode {
  kIndexOutOfRange,
  kDuplicateEdge,
  kSelfLoop,
  kShapeMismatch,
  kInvalidAssignment,
  kNonDivisibleBlock,
  kLossNotScalar,
  kEmptyMask,
  kGenerationExhausted,
  kInvalidConfig,
  kIo,
  kFormat,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace ghr
