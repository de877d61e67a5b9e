#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace s2s {

enum class ErrorCode {
  DimensionMismatch,
  NotOrthonormal,
  InvalidArgument,
  ZeroLabel,
  AmbiguousArgmax,
  CollapsedNeuron,
  NonFinite,
  BadScale,
  ClusterMismatch,
  TooFewSamples,
  DegenerateFit,
  BadDelta,
  Config,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code. Every failure raised by the
/// library is an s2s::Error; the CLI maps the code onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace s2s
