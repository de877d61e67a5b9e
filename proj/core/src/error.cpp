#include "s2s/error.hpp"

namespace s2s {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotOrthonormal: return "NotOrthonormal";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroLabel: return "ZeroLabel";
    case ErrorCode::AmbiguousArgmax: return "AmbiguousArgmax";
    case ErrorCode::CollapsedNeuron: return "CollapsedNeuron";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::BadScale: return "BadScale";
    case ErrorCode::ClusterMismatch: return "ClusterMismatch";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::BadDelta: return "BadDelta";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace s2s
