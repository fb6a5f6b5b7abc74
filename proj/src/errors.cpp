#include "ciaf/errors.hpp"

namespace ciaf {

std::string_view to_string(ErrorFamily family) {
  switch (family) {
    case ErrorFamily::Input: return "input";
    case ErrorFamily::Ontology: return "ontology";
    case ErrorFamily::Scenario: return "scenario";
    case ErrorFamily::Gate: return "gate";
    case ErrorFamily::Analysis: return "analysis";
    case ErrorFamily::Backend: return "backend";
    case ErrorFamily::Evaluation: return "evaluation";
  }
  return "unknown";
}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& reason)
    : Error(ErrorFamily::Ontology, "parse error at line " + std::to_string(line) +
                                       ", column " + std::to_string(column) + ": " + reason),
      line_(line),
      column_(column) {}

ValidationError::ValidationError(std::string entity, const std::string& reason)
    : Error(ErrorFamily::Ontology, "invalid " + entity + ": " + reason),
      entity_(std::move(entity)) {}

MissingAttribute::MissingAttribute(std::string name)
    : Error(ErrorFamily::Gate, "missing required attribute: " + name), name_(std::move(name)) {}

TypeMismatch::TypeMismatch(std::string name, const std::string& reason)
    : Error(ErrorFamily::Gate, "attribute '" + name + "' type mismatch: " + reason),
      name_(std::move(name)) {}

FormatError::FormatError(std::size_t line, const std::string& reason)
    : Error(ErrorFamily::Input, "line " + std::to_string(line) + ": " + reason), line_(line) {}

MissingColumn::MissingColumn(std::string column)
    : Error(ErrorFamily::Input, "missing required column: " + column),
      column_(std::move(column)) {}

BatchError::BatchError(std::size_t row, const Error& cause)
    : Error(cause.family(), "row " + std::to_string(row) + ": " + cause.what()), row_(row) {}

LengthMismatch::LengthMismatch(std::size_t truth, std::size_t predicted)
    : Error(ErrorFamily::Evaluation, "label length mismatch: truth has " +
                                         std::to_string(truth) + ", predictions have " +
                                         std::to_string(predicted)) {}

PhaseError::PhaseError(int phase, std::string phase_name, const Error& cause)
    : Error(cause.family(), "phase " + std::to_string(phase) + " (" + phase_name +
                                "): " + cause.what()),
      phase_(phase),
      phase_name_(std::move(phase_name)) {}

}  // namespace ciaf
