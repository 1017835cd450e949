#ifndef STEREOBENCH_ERROR_HPP
#define STEREOBENCH_ERROR_HPP

#include <stdexcept>
#include <string>

namespace stereobench {

/// Precondition violated by the caller (bad dimensions, non-positive depth, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or unsupported file contents. Carries the byte offset at which
/// parsing stopped when it is known.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, long long offset = -1)
      : std::runtime_error(offset >= 0 ? what + " (at byte " + std::to_string(offset) + ")"
                                       : what),
        offset_(offset) {}
  long long offset() const noexcept { return offset_; }

 private:
  long long offset_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fit or estimate could not be formed from the data (too few samples,
/// too few populated bins, ...).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The data are there but do not constrain all parameters.
class DegenerateGeometry : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// Scene description failed validation. `field` names the offending entry.
class SceneValidationError : public InvalidInput {
 public:
  SceneValidationError(const std::string& field, const std::string& what)
      : InvalidInput(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace stereobench

#endif  // STEREOBENCH_ERROR_HPP
