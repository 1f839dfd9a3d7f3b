#include "spdekit/error.hpp"

namespace spdekit {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::CollinearInput: return "CollinearInput";
    case ErrorKind::DegeneratePolygon: return "DegeneratePolygon";
    case ErrorKind::EmptyIntersection: return "EmptyIntersection";
    case ErrorKind::NonSpdAnisotropy: return "NonSpdAnisotropy";
    case ErrorKind::AsymmetricGraph: return "AsymmetricGraph";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::WeightOutOfRange: return "WeightOutOfRange";
    case ErrorKind::NonPositivePrecision: return "NonPositivePrecision";
    case ErrorKind::NonPositiveArgument: return "NonPositiveArgument";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::GridExplosion: return "GridExplosion";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NewtonDivergence: return "NewtonDivergence";
    case ErrorKind::OptimizerFailure: return "OptimizerFailure";
    case ErrorKind::MeshRefinementFailure: return "MeshRefinementFailure";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite:
    case ErrorKind::NewtonDivergence:
    case ErrorKind::OptimizerFailure:
    case ErrorKind::MeshRefinementFailure:
      return true;
    default:
      return false;
  }
}

}  // namespace spdekit
