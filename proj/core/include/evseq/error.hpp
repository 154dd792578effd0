#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace evseq {

/// Base for every error raised by the engine. `code()` is the stable name
/// surfaced to API clients and CLI logs.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define EVSEQ_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

EVSEQ_DEFINE_ERROR(NameError);
EVSEQ_DEFINE_ERROR(NotFoundError);
EVSEQ_DEFINE_ERROR(StaleSelectionError);
EVSEQ_DEFINE_ERROR(SchemaError);
EVSEQ_DEFINE_ERROR(EmptyDatasetError);
EVSEQ_DEFINE_ERROR(ConfigError);
EVSEQ_DEFINE_ERROR(EmptyInputError);
EVSEQ_DEFINE_ERROR(NumericError);
EVSEQ_DEFINE_ERROR(InsufficientDataError);
EVSEQ_DEFINE_ERROR(TypeError);
EVSEQ_DEFINE_ERROR(StateError);
EVSEQ_DEFINE_ERROR(ConflictError);
EVSEQ_DEFINE_ERROR(IoError);

#undef EVSEQ_DEFINE_ERROR

/// Query syntax error. `position` is the 0-based character offset where
/// parsing stopped.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, std::vector<std::string> expected, const std::string& message)
      : Error("ParseError", message), position_(position), expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::vector<std::string> expected_;
};

}  // namespace evseq
