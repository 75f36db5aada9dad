#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace confgate {

// Base class for all library errors. code() is a stable machine-readable tag;
// the CLI echoes it in its error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class ZeroVectorRow : public Error {
 public:
  explicit ZeroVectorRow(std::size_t row)
      : Error("zero_vector_row",
              "embedding row " + std::to_string(row) + " has (near-)zero norm"),
        row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& message)
      : Error("dimension_mismatch", message) {}
};

class NotNormalized : public Error {
 public:
  explicit NotNormalized(const std::string& message)
      : Error("not_normalized", message) {}
};

class BatchTooSmall : public Error {
 public:
  explicit BatchTooSmall(std::size_t size)
      : Error("batch_too_small", "batch has " + std::to_string(size) +
                                     " rows; leave-one-out needs at least 2") {}
};

class EmptyBag : public Error {
 public:
  explicit EmptyBag(const std::string& message = "residual bag is empty")
      : Error("empty_bag", message) {}
};

class InconsistentBatchSizes : public Error {
 public:
  InconsistentBatchSizes(std::size_t expected, std::size_t got)
      : Error("inconsistent_batch_sizes",
              "calibration bags must share one size; saw " +
                  std::to_string(expected) + " and " + std::to_string(got)) {}
};

class EmptySet : public Error {
 public:
  explicit EmptySet(const std::string& message = "value set is empty")
      : Error("empty_set", message) {}
};

class EmptyInput : public Error {
 public:
  explicit EmptyInput(const std::string& message = "input is empty")
      : Error("empty_input", message) {}
};

class InvalidConfig : public Error {
 public:
  explicit InvalidConfig(const std::string& message)
      : Error("invalid_config", message) {}
};

class TooFewBatches : public Error {
 public:
  TooFewBatches(std::size_t got, std::size_t need)
      : Error("too_few_batches", "need at least " + std::to_string(need) +
                                     " batches, got " + std::to_string(got)) {}
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("parse_error",
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SeverityOutOfRange : public Error {
 public:
  SeverityOutOfRange(const std::string& response_id, double value)
      : Error("severity_out_of_range",
              "response " + response_id + " has severity " +
                  std::to_string(value) + " outside [0, 1]") {}
};

class VersionMismatch : public Error {
 public:
  explicit VersionMismatch(const std::string& message)
      : Error("version_mismatch", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io_error", message) {}
};

}  // namespace confgate
