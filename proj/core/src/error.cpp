#include "devquad/error.hpp"

namespace devquad {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateFace: return "DegenerateFace";
    case ErrorCode::NonQuadFace: return "NonQuadFace";
    case ErrorCode::InconsistentOrientation: return "InconsistentOrientation";
    case ErrorCode::NonManifoldEdge: return "NonManifoldEdge";
    case ErrorCode::InvalidIndex: return "InvalidIndex";
    case ErrorCode::UnknownVertex: return "UnknownVertex";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::ReferenceQueryFailure: return "ReferenceQueryFailure";
    case ErrorCode::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorCode::NonFiniteResidual: return "NonFiniteResidual";
    case ErrorCode::GramSingular: return "GramSingular";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::StripTooNarrow: return "StripTooNarrow";
    case ErrorCode::NonSeparating: return "NonSeparating";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidSession: return "InvalidSession";
    case ErrorCode::MalformedMessage: return "MalformedMessage";
    case ErrorCode::StaleRevision: return "StaleRevision";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& message,
                           const std::vector<int>& elements) {
  std::string out(to_string(code));
  out += ": ";
  out += message;
  if (!elements.empty()) {
    out += " [";
    for (std::size_t i = 0; i < elements.size() && i < 8; ++i) {
      if (i) out += ", ";
      out += std::to_string(elements[i]);
    }
    if (elements.size() > 8) out += ", ...";
    out += "]";
  }
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::vector<int> elements)
    : std::runtime_error(format_message(code, message, elements)),
      code_(code),
      elements_(std::move(elements)) {}

}  // namespace devquad
