#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace devquad {

enum class ErrorCode {
  DegenerateFace,
  NonQuadFace,
  InconsistentOrientation,
  NonManifoldEdge,
  InvalidIndex,
  UnknownVertex,
  EmptyReference,
  ReferenceQueryFailure,
  LinearSolveFailure,
  NonFiniteResidual,
  GramSingular,
  CountMismatch,
  DegenerateInput,
  StripTooNarrow,
  NonSeparating,
  ParseError,
  InvalidConfig,
  InvalidSession,
  MalformedMessage,
  StaleRevision,
  Io,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-readable code and,
// where it makes sense, the indices of the offending mesh elements.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<int> elements = {});

  ErrorCode code() const noexcept { return code_; }
  const std::vector<int>& elements() const noexcept { return elements_; }

 private:
  ErrorCode code_;
  std::vector<int> elements_;
};

}  // namespace devquad
