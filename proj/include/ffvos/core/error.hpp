#pragma once

#include <stdexcept>
#include <string>

namespace ffvos {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated (dimension mismatch, bad box...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class EmptyMaskError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable input on disk. The message names the offending file.
class IngestError : public Error {
 public:
  using Error::Error;
};

class WriteError : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage could not produce a result for a sequence.
/// `code` is a stable machine-readable identifier; `frame` is -1 when the
/// failure is not tied to a single frame.
class PipelineError : public Error {
 public:
  PipelineError(std::string code, int frame, const std::string& what)
      : Error(what), code_(std::move(code)), frame_(frame) {}

  const std::string& code() const noexcept { return code_; }
  int frame() const noexcept { return frame_; }

 private:
  std::string code_;
  int frame_;
};

}  // namespace ffvos
