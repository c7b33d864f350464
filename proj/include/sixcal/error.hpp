#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sixcal {

enum class ErrorCode {
  kZeroPolynomial,
  kNotPositiveDefinite,
  kDegenerateMatrix,
  kPointAtCameraCenter,
  kDegenerateQuad,
  kSingularFirstCamera,
  kProjectionAtInfinity,
  kDegenerateView,
  kRankDefect,
  kNoRealCandidate,
  kBasisPointCoincidence,
  kEmptySolutionSet,
  kStructuralViolation,
  kBasisOverflow,
  kPivotPatternBroken,
  kRankUnexpected,
  kNormalizationFailure,
  kImproperRotation,
  kResampleExhausted,
  kDltRankDefect,
  kZeroTranslation,
  kCoincidentCenters,
  kNoHypothesis,
};

std::string_view ErrorCodeName(ErrorCode code);

// Thrown by every solver stage. Callers that iterate over candidate roots
// catch it and record the code as a per-root diagnostic.
class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sixcal
