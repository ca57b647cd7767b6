#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace mpf {

/// Coarse error classes. The CLI maps each one to a distinct exit code.
enum class ErrorCategory {
  invalid_argument,
  invalid_detection,
  schema,
  io,
  untrained,
  runtime,
};

std::string_view to_string(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// A detection whose geometry cannot produce a measurement (zero or negative width).
class InvalidDetection : public Error {
 public:
  explicit InvalidDetection(const std::string& message)
      : Error(ErrorCategory::invalid_detection, message) {}
};

/// Schema or validation failure in a structured input. `field` names the offending key path.
class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string& message)
      : Error(ErrorCategory::schema, field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Scoring was requested from a classifier that has never been trained.
class UntrainedClassifier : public Error {
 public:
  UntrainedClassifier() : Error(ErrorCategory::untrained, "classifier has not been trained") {}
};

}  // namespace mpf
