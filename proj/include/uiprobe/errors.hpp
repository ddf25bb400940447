#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uiprobe {

enum class ErrorCode {
  // action grammar
  MalformedAction,
  NoBoxedContent,
  MissingVerdict,
  MissingTerminate,
  // environment
  LoadFailure,
  CaptureFailure,
  UnknownTarget,
  ExecutionFailure,
  // graph
  DanglingEndpoint,
  SerializationFailure,
  SchemaMismatch,
  // policy
  MissingSlot,
  BackendFailure,
  EmptyProposal,
  // validator
  EmptyReference,
  ProtocolFailure,
  // metrics
  EmptyGold,
  LengthMismatch,
  // corpus / export
  UnsupportedWidget,
  IncompleteRun,
  EmptyGraph,
  // generic
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every domain failure surfaces as an Error carrying a code; callers that need
// to branch on the kind of failure inspect code() instead of parsing what().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace uiprobe
