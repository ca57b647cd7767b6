#include "mpf/errors.hpp"

namespace mpf {

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::invalid_argument: return "invalid_argument";
    case ErrorCategory::invalid_detection: return "invalid_detection";
    case ErrorCategory::schema: return "schema";
    case ErrorCategory::io: return "io";
    case ErrorCategory::untrained: return "untrained";
    case ErrorCategory::runtime: return "runtime";
  }
  return "runtime";
}

}  // namespace mpf
