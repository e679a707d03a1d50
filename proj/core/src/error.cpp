#include "callosim/error.hpp"

namespace callosim {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::NoTargetStructure: return "NoTargetStructure";
    case ErrorCode::MetadataMismatch: return "MetadataMismatch";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnsupportedDatatype: return "UnsupportedDatatype";
    case ErrorCode::ObliqueAffine: return "ObliqueAffine";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnmappedCode: return "UnmappedCode";
    case ErrorCode::AllClassesAbsent: return "AllClassesAbsent";
    case ErrorCode::GAOutOfRange: return "GAOutOfRange";
    case ErrorCode::DegenerateDesign: return "DegenerateDesign";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InconsistentTopology: return "InconsistentTopology";
  }
  return "Unknown";
}

}  // namespace callosim
