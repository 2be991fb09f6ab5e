#include "dexskin/error.hpp"

namespace dexskin {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::EmptyBaseline: return "EmptyBaseline";
    case Errc::ZeroBaseline: return "ZeroBaseline";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::InvalidLayout: return "InvalidLayout";
    case Errc::RangeExceeded: return "RangeExceeded";
    case Errc::ParseError: return "ParseError";
    case Errc::SeriesTooShort: return "SeriesTooShort";
    case Errc::NoPeaks: return "NoPeaks";
    case Errc::NoOverlap: return "NoOverlap";
    case Errc::DegenerateData: return "DegenerateData";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::NonPositiveLogArgument: return "NonPositiveLogArgument";
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::NoCompleteCycle: return "NoCompleteCycle";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::IllegalTransition: return "IllegalTransition";
    case Errc::CoverageGap: return "CoverageGap";
    case Errc::UnknownSession: return "UnknownSession";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace dexskin
