#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ciaf {

/// Coarse error grouping; the CLI maps each family to its own exit code.
enum class ErrorFamily {
  Input,       // malformed or missing input data
  Ontology,    // ontology parse/validation
  Scenario,    // scenario lookup
  Gate,        // prompt gate rejection / attribute errors
  Analysis,    // transform-stage errors
  Backend,     // classifier backend failures
  Evaluation,  // metric computation
};

std::string_view to_string(ErrorFamily family);

class Error : public std::runtime_error {
 public:
  Error(ErrorFamily family, const std::string& what)
      : std::runtime_error(what), family_(family) {}

  ErrorFamily family() const noexcept { return family_; }

 private:
  ErrorFamily family_;
};

// ---- ontology ----

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& reason);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string entity, const std::string& reason);
  const std::string& entity() const noexcept { return entity_; }

 private:
  std::string entity_;
};

class UnknownScenario : public Error {
 public:
  explicit UnknownScenario(const std::string& what)
      : Error(ErrorFamily::Scenario, what) {}
};

class MissingAttribute : public Error {
 public:
  explicit MissingAttribute(std::string name);
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class TypeMismatch : public Error {
 public:
  TypeMismatch(std::string name, const std::string& reason);
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

// ---- ingestion ----

class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& reason);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MissingColumn : public Error {
 public:
  explicit MissingColumn(std::string column);
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class EmptyInput : public Error {
 public:
  explicit EmptyInput(const std::string& what, ErrorFamily family = ErrorFamily::Input)
      : Error(family, what) {}
};

// ---- transform ----

class EmptyColumn : public Error {
 public:
  explicit EmptyColumn(const std::string& column)
      : Error(ErrorFamily::Analysis, "column has no observed values: " + column) {}
};

class UnknownFeature : public Error {
 public:
  explicit UnknownFeature(const std::string& what)
      : Error(ErrorFamily::Analysis, what) {}
};

class StatsMismatch : public Error {
 public:
  explicit StatsMismatch(const std::string& column)
      : Error(ErrorFamily::Analysis, "no statistics for column: " + column) {}
};

// ---- llm ----

class MissingFeature : public Error {
 public:
  explicit MissingFeature(const std::string& feature)
      : Error(ErrorFamily::Backend, "row has no column for rule feature: " + feature) {}
};

class TransportError : public Error {
 public:
  explicit TransportError(const std::string& what) : Error(ErrorFamily::Backend, what) {}
};

class AuthError : public Error {
 public:
  explicit AuthError(const std::string& what) : Error(ErrorFamily::Backend, what) {}
};

class UnparseableResponse : public Error {
 public:
  explicit UnparseableResponse(const std::string& what)
      : Error(ErrorFamily::Backend, what) {}
};

/// A per-row classification failure; carries the index of the first failing row.
class BatchError : public Error {
 public:
  BatchError(std::size_t row, const Error& cause);
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// ---- evaluation ----

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t truth, std::size_t predicted);
};

// ---- synthlab ----

class WindowOutOfRange : public Error {
 public:
  explicit WindowOutOfRange(const std::string& what) : Error(ErrorFamily::Input, what) {}
};

// ---- pipeline ----

/// Wraps an upstream error with the forensic phase it occurred in.
class PhaseError : public Error {
 public:
  PhaseError(int phase, std::string phase_name, const Error& cause);
  int phase() const noexcept { return phase_; }
  const std::string& phase_name() const noexcept { return phase_name_; }

 private:
  int phase_;
  std::string phase_name_;
};

}  // namespace ciaf
