#include "ghr/error.hpp"

namespace ghr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kDuplicateEdge: return "DuplicateEdge";
    case ErrorCode::kSelfLoop: return "SelfLoop";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kInvalidAssignment: return "InvalidAssignment";
    case ErrorCode::kNonDivisibleBlock: return "NonDivisibleBlock";
    case ErrorCode::kLossNotScalar: return "LossNotScalar";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kGenerationExhausted: return "GenerationExhausted";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kFormat: return "FormatError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace ghr
