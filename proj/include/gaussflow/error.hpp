#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gaussflow {

enum class ErrorKind {
  kRankDeficient,
  kNotAGraph,
  kGraphChartExit,
  kDimensionMismatch,
  kNotBoundaryPoint,
  kNoGeodesicFound,
  kDegenerateMetric,
  kCflViolation,
  kGridMismatch,
  kOutOfChart,
  kConfigError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kRankDeficient: return "RankDeficient";
    case ErrorKind::kNotAGraph: return "NotAGraph";
    case ErrorKind::kGraphChartExit: return "GraphChartExit";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kNotBoundaryPoint: return "NotBoundaryPoint";
    case ErrorKind::kNoGeodesicFound: return "NoGeodesicFound";
    case ErrorKind::kDegenerateMetric: return "DegenerateMetric";
    case ErrorKind::kCflViolation: return "CflViolation";
    case ErrorKind::kGridMismatch: return "GridMismatch";
    case ErrorKind::kOutOfChart: return "OutOfChart";
    case ErrorKind::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gaussflow
