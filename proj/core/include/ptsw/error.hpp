#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ptsw {

/// Failure categories raised by the library. Names are stable and appear in
/// CLI diagnostics.
enum class ErrorCode {
  NonConvergence,
  DefectiveMatrix,
  IndexOutOfRange,
  DimensionMismatch,
  VanishingDenominator,
  InvalidParams,
  SingleQubitEP,
  InvalidLabel,
  NotPTSymmetric,
  EmptyContour,
  NoConvergence,
  RankDeficient,
  AmbiguousCase,
  ParityAmbiguous,
  TrackingAmbiguous,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ptsw
