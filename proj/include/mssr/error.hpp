#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mssr {

enum class ErrorKind {
  kEmptyMarket,
  kNonPositivePrice,
  kDominanceViolation,
  kDegenerateBn,
  kLambdaOutOfRange,
  kZeroDenominator,
  kInfeasibleBound,
  kDegeneratePrices,
  kOracleScaleExceeded,
  kConfigInvalid,
  kEmptyDistribution,
  kAllZeroCounts,
  kNonContiguousEpisodes,
  kParseError,
  kIoError,
  kInvalidArgument,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEmptyMarket: return "EmptyMarket";
    case ErrorKind::kNonPositivePrice: return "NonPositivePrice";
    case ErrorKind::kDominanceViolation: return "DominanceViolation";
    case ErrorKind::kDegenerateBn: return "DegenerateBn";
    case ErrorKind::kLambdaOutOfRange: return "LambdaOutOfRange";
    case ErrorKind::kZeroDenominator: return "ZeroDenominator";
    case ErrorKind::kInfeasibleBound: return "InfeasibleBound";
    case ErrorKind::kDegeneratePrices: return "DegeneratePrices";
    case ErrorKind::kOracleScaleExceeded: return "OracleScaleExceeded";
    case ErrorKind::kConfigInvalid: return "ConfigInvalid";
    case ErrorKind::kEmptyDistribution: return "EmptyDistribution";
    case ErrorKind::kAllZeroCounts: return "AllZeroCounts";
    case ErrorKind::kNonContiguousEpisodes: return "NonContiguousEpisodes";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kIoError: return "IoError";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mssr
