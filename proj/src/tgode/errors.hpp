#pragma once

#include <stdexcept>
#include <string>

namespace tgode {

// Contract violations: a caller broke a documented precondition.
struct ContractError : std::logic_error {
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// Shape mismatch inside the tensor engine; message names the op and shapes.
struct DimensionError : std::invalid_argument {
  explicit DimensionError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Math domain violation (log of non-positive, softmax of non-finite, ...).
struct DomainError : std::domain_error {
  explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

// Input file could not be parsed; carries a line number where known.
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, long line) : std::runtime_error(msg), line_number(line) {}
  long line_number;
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Checkpoint/data disagreement (e.g. vocabulary size mismatch).
struct MismatchError : std::runtime_error {
  explicit MismatchError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values encountered during training or inference.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration key or value.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tgode
