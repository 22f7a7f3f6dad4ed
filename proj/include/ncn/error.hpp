#pragma once

#include <stdexcept>
#include <string>

namespace ncn {

/// Process exit codes shared by every CLI command.
enum class ExitCode : int {
  ok = 0,
  config = 1,
  io = 2,
  shape = 3,
  divergence = 4,
  audit = 5,
};

/// Root of the library's exception hierarchy. Each subclass carries the exit
/// code the CLI maps it to.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  [[nodiscard]] virtual ExitCode exit_code() const noexcept = 0;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::config; }
};

class IoError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::io; }
};

class ShapeError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::shape; }
};

class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t epoch, const std::string& what)
      : Error(what), epoch_(epoch) {}
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::divergence; }
  [[nodiscard]] std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

/// Raised when the live operation tally disagrees with the predicted budget,
/// or when a gradient check exceeds its tolerance.
class AuditError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::audit; }
};

/// Dataset file problems that are not plain IO failures (ragged rows,
/// non-numeric cells, empty files).
class ParseError : public IoError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : IoError(what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Checkpoint load failures. Reported through the IO exit code.
class CheckpointError : public IoError {
 public:
  using IoError::IoError;
};

class MalformedCheckpoint : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class CheckpointVersionMismatch : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class CheckpointShapeMismatch : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

}  // namespace ncn
