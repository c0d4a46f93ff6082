// Exception hierarchy shared by every apsyn component.
//
// Each error carries a category so front ends (the CLI) can map failures
// onto stable exit codes without string matching.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace apsyn {

enum class ErrorKind {
  kUsage,       // bad parameters or configuration
  kData,        // malformed input, I/O, inconsistent containers
  kNotInModel,  // a queried word is missing from the vocabulary
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Stream-level failure while reading a corpus.
class ReadError : public Error {
 public:
  ReadError(const std::string& what, std::uint64_t byte_offset)
      : Error(ErrorKind::kData,
              what + " (at byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::uint64_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::uint64_t byte_offset_;
};

// Input does not look like the expected format at all.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what)
      : Error(ErrorKind::kData, what) {}
};

// A single malformed record in a line-oriented file.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(ErrorKind::kData,
              "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MergeError : public Error {
 public:
  explicit MergeError(const std::string& what)
      : Error(ErrorKind::kData, what) {}
};

// PMI is undefined on a matrix with no observations.
class EmptyModelError : public Error {
 public:
  EmptyModelError()
      : Error(ErrorKind::kData, "co-occurrence matrix is empty (D = 0)") {}
};

class NotInModelError : public Error {
 public:
  explicit NotInModelError(const std::string& word)
      : Error(ErrorKind::kNotInModel, "not in model: " + word), word_(word) {}

  const std::string& word() const noexcept { return word_; }

 private:
  std::string word_;
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what)
      : Error(ErrorKind::kUsage, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kUsage, what) {}
};

class UndefinedAccuracyError : public Error {
 public:
  UndefinedAccuracyError()
      : Error(ErrorKind::kData,
              "accuracy undefined: no scored questions in configuration") {}
};

}  // namespace apsyn
