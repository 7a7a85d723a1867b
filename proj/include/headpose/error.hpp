#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace headpose {

enum class ErrorKind {
  InvalidInput,
  DegenerateInput,
  DegenerateGeometry,
  DegenerateDecomposition,
  BehindCamera,
  NumericalFailure,
  ParseError,
};

const char* to_string(ErrorKind kind);

// Runtime failure with a machine-checkable kind and, when raised inside the
// estimation pipeline, the stage that produced it ("normalize", "sphere_fit",
// "initial_rotation", ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Error(ErrorKind kind, std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message),
        kind_(kind),
        stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }

  // Re-tags an error with the pipeline stage it surfaced from.
  static Error at_stage(std::string stage, const Error& e) {
    return Error(e.kind(), std::move(stage), e.what());
  }

 private:
  ErrorKind kind_;
  std::string stage_;
};

}  // namespace headpose
