#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spdekit {

/// Every failure raised by the library carries one of these kinds. The CLI
/// maps them onto exit codes and the HTTP service onto status codes, so the
/// grouping into validation vs numerical failures matters.
enum class ErrorKind {
  // input validation
  InvalidArgument,
  DimensionMismatch,
  CollinearInput,
  DegeneratePolygon,
  EmptyIntersection,
  NonSpdAnisotropy,
  AsymmetricGraph,
  IndexOutOfRange,
  MalformedLine,
  WeightOutOfRange,
  NonPositivePrecision,
  NonPositiveArgument,
  TooShort,
  GridExplosion,
  // numerical
  NotPositiveDefinite,
  NewtonDivergence,
  OptimizerFailure,
  MeshRefinementFailure,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// True for kinds that indicate a numerical breakdown rather than bad input.
bool is_numerical(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace spdekit
