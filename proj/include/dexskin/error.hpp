#pragma once

#include <stdexcept>
#include <string>

namespace dexskin {

enum class Errc {
  EmptyBaseline,
  ZeroBaseline,
  LengthMismatch,
  InvalidLayout,
  RangeExceeded,
  ParseError,
  SeriesTooShort,
  NoPeaks,
  NoOverlap,
  DegenerateData,
  NonConvergence,
  NonPositiveLogArgument,
  OutOfBounds,
  NoCompleteCycle,
  ShapeMismatch,
  InvalidArgument,
  InvalidConfig,
  IllegalTransition,
  CoverageGap,
  UnknownSession,
  Io,
};

const char* to_string(Errc code);

/// Every fallible operation in the toolkit throws this; `code()` identifies the
/// contract that was violated so callers and the HTTP layer can branch on it.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dexskin
