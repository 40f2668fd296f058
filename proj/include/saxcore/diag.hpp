#ifndef SAXCORE_DIAG_HPP
#define SAXCORE_DIAG_HPP

#include <string>
#include <vector>

namespace sax {

// Source position, 1-based. line == 0 means "no position".
struct Span {
  int line = 0;
  int col = 0;
};

struct Diag {
  std::string file;
  Span span;
  std::string code;
  std::string msg;

  std::string render() const;
};

std::string render_diags(const std::vector<Diag>& ds);

// Diagnostic codes. Kept as plain strings so new codes need no enum churn;
// these constants are the stable names used in tests and CLI output.
namespace code {
inline constexpr const char* NonContractive = "NonContractive";
inline constexpr const char* MissingDefinition = "MissingDefinition";
inline constexpr const char* ShiftModeViolation = "ShiftModeViolation";
inline constexpr const char* UnknownTypeVar = "UnknownTypeVar";
inline constexpr const char* UnknownMode = "UnknownMode";
inline constexpr const char* SigmaNotMonotone = "SigmaNotMonotone";
inline constexpr const char* LinearUnused = "LinearUnused";
inline constexpr const char* LinearReused = "LinearReused";
inline constexpr const char* LinearResidue = "LinearResidue";
inline constexpr const char* ModeSideCondition = "ModeSideCondition";
inline constexpr const char* TypeMismatch = "TypeMismatch";
inline constexpr const char* UnknownLabel = "UnknownLabel";
inline constexpr const char* SeqOnlyViolation = "SeqOnlyViolation";
inline constexpr const char* ArityMismatch = "ArityMismatch";
inline constexpr const char* NoValidOrder = "NoValidOrder";
inline constexpr const char* ObjectIllTyped = "ObjectIllTyped";
inline constexpr const char* PolarityUnknown = "PolarityUnknown";
inline constexpr const char* OverlappingLabels = "OverlappingLabels";
inline constexpr const char* ModeMismatch = "ModeMismatch";
inline constexpr const char* ShapeMismatch = "ShapeMismatch";
inline constexpr const char* ParseError = "ParseError";
inline constexpr const char* UnknownVar = "UnknownVar";
inline constexpr const char* UnknownProc = "UnknownProc";
inline constexpr const char* DuplicateName = "DuplicateName";
inline constexpr const char* AnnotationRequired = "AnnotationRequired";
}  // namespace code

}  // namespace sax

#endif
