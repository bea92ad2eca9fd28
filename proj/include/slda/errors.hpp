#pragma once

#include <stdexcept>
#include <string>

namespace slda {

// Malformed input text; line numbers are 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Pruning removed every term.
class PruneEmptyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure while fitting: non-finite values or a bound regression.
class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A document references a term id outside the model's vocabulary.
class VocabMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model file does not match the expected layout.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model file has an unsupported version number.
class VersionError : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

}  // namespace slda
