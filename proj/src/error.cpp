#include "vmpforge/error.hpp"

namespace vmpforge {

std::string to_string(const SourceLocation& loc) {
  return std::to_string(loc.line) + ":" + std::to_string(loc.column);
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::TypeError: return "TypeError";
    case ErrorCode::MissingParam: return "MissingParam";
    case ErrorCode::UnresolvedPlate: return "UnresolvedPlate";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateDistribution: return "DegenerateDistribution";
    case ErrorCode::NonFiniteMessage: return "NonFiniteMessage";
    case ErrorCode::CyclicModel: return "CyclicModel";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::ObservedVariable: return "ObservedVariable";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace vmpforge
