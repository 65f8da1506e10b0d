#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tqk {

// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text did not match a grammar. offset is a byte offset into the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// A well-formed derivation that cannot be executed (division by zero,
// non-numeric aggregate input, unknown column, ...).
class ExecError : public Error {
 public:
  using Error::Error;
};

// Error tagged with the pipeline stage that produced it, e.g. "llm" or "execute".
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace tqk
