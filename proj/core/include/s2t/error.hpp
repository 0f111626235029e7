#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace s2t {

// Every failure raised by the toolkit derives from Error so callers can catch
// one type at module boundaries.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// sql_ast_graph
class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& message)
      : Error("parse error at offset " + std::to_string(position) + ": " + message),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class MultiStatementError : public Error {
 public:
  explicit MultiStatementError(std::size_t position)
      : Error("more than one SQL statement (second starts at offset " +
              std::to_string(position) + ")") {}
};

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("cannot build a vocabulary from an empty corpus") {}
};

// graph_encoder
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class TokenOutOfRange : public Error {
 public:
  using Error::Error;
};

// demo_selection
class PoolTooSmall : public Error {
 public:
  PoolTooSmall(std::size_t available, std::size_t required)
      : Error("demonstration pool too small: " + std::to_string(available) +
              " available, " + std::to_string(required) + " required") {}
};

class EmptyPool : public Error {
 public:
  EmptyPool() : Error("demonstration pool is empty") {}
};

class DegenerateClustering : public Error {
 public:
  using Error::Error;
};

// prompt_builder
class UnknownTemplate : public Error {
 public:
  explicit UnknownTemplate(const std::string& id) : Error("unknown template: " + id) {}
};

class EmptySql : public Error {
 public:
  EmptySql() : Error("SQL text is empty") {}
};

class PromptTooLong : public Error {
 public:
  PromptTooLong(std::size_t estimate, std::size_t budget)
      : Error("prompt needs ~" + std::to_string(estimate) + " tokens, budget is " +
              std::to_string(budget)) {}
};

class MalformedResponse : public Error {
 public:
  MalformedResponse(int step, const std::string& detail)
      : Error("malformed response at step " + std::to_string(step) + ": " + detail),
        step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

// llm_gateway
class AuthError : public Error {
 public:
  using Error::Error;
};

class RateLimited : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class ResponseSchemaError : public Error {
 public:
  using Error::Error;
};

// metrics
class EmptyCandidate : public Error {
 public:
  EmptyCandidate() : Error("candidate text is empty") {}
};

class EmptyReferences : public Error {
 public:
  EmptyReferences() : Error("no reference texts") {}
};

class ProviderUnavailable : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : Error("paired samples differ in length: " + std::to_string(a) + " vs " +
              std::to_string(b)) {}
};

class TooFewSamples : public Error {
 public:
  explicit TooFewSamples(std::size_t n)
      : Error("need at least 2 paired samples, got " + std::to_string(n)) {}
};

class RaggedMatrix : public Error {
 public:
  using Error::Error;
};

class TooFewCandidates : public Error {
 public:
  explicit TooFewCandidates(std::size_t n)
      : Error("quality filter needs at least 3 candidates, got " + std::to_string(n)) {}
};

// dataset_io
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, const std::string& field, const std::string& detail)
      : Error("line " + std::to_string(line) + ", field '" + field + "': " + detail),
        line_(line),
        field_(field) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// experiment_cli
class ConfigError : public Error {
 public:
  using Error::Error;
};

class MissingReference : public Error {
 public:
  explicit MissingReference(const std::string& id)
      : Error("no reference utterance for record " + id) {}
};

}  // namespace s2t
