#include "ptsw/error.hpp"

namespace ptsw {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DefectiveMatrix: return "DefectiveMatrix";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::VanishingDenominator: return "VanishingDenominator";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::SingleQubitEP: return "SingleQubitEP";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::NotPTSymmetric: return "NotPTSymmetric";
    case ErrorCode::EmptyContour: return "EmptyContour";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::AmbiguousCase: return "AmbiguousCase";
    case ErrorCode::ParityAmbiguous: return "ParityAmbiguous";
    case ErrorCode::TrackingAmbiguous: return "TrackingAmbiguous";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace ptsw
