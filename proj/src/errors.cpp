#include "uiprobe/errors.hpp"

namespace uiprobe {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedAction: return "MalformedAction";
    case ErrorCode::NoBoxedContent: return "NoBoxedContent";
    case ErrorCode::MissingVerdict: return "MissingVerdict";
    case ErrorCode::MissingTerminate: return "MissingTerminate";
    case ErrorCode::LoadFailure: return "LoadFailure";
    case ErrorCode::CaptureFailure: return "CaptureFailure";
    case ErrorCode::UnknownTarget: return "UnknownTarget";
    case ErrorCode::ExecutionFailure: return "ExecutionFailure";
    case ErrorCode::DanglingEndpoint: return "DanglingEndpoint";
    case ErrorCode::SerializationFailure: return "SerializationFailure";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::MissingSlot: return "MissingSlot";
    case ErrorCode::BackendFailure: return "BackendFailure";
    case ErrorCode::EmptyProposal: return "EmptyProposal";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::ProtocolFailure: return "ProtocolFailure";
    case ErrorCode::EmptyGold: return "EmptyGold";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::UnsupportedWidget: return "UnsupportedWidget";
    case ErrorCode::IncompleteRun: return "IncompleteRun";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace uiprobe
