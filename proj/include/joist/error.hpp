#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace joist {

/// Broad failure classes. The CLI maps each to an exit code.
enum class ErrorCategory {
  usage,      // bad invocation or unsupported request
  data,       // malformed or inconsistent input data
  remote,     // node unreachable, auth failure, RPC failure
  numerical,  // rank deficiency, degenerate variance
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// A record is missing a field or a field has the wrong type.
class ParseError : public Error {
 public:
  ParseError(std::string field, const std::string& what)
      : Error(ErrorCategory::data, what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// File layout does not match the interchange format.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

/// Rows violate dataset invariants (duplicate heights, non-positive times).
class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

/// Mismatched or empty input sequences.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

/// Not enough observations for the requested computation.
class SampleCountError : public Error {
 public:
  explicit SampleCountError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

/// Invalid synthetic-data or split configuration.
class SpecError : public Error {
 public:
  explicit SpecError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

class UnsupportedKindError : public Error {
 public:
  explicit UnsupportedKindError(const std::string& what) : Error(ErrorCategory::usage, what) {}
};

/// The node has no block at the requested height.
class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

/// Transport, authentication or JSON-RPC level failure.
class ConnectionError : public Error {
 public:
  explicit ConnectionError(const std::string& what) : Error(ErrorCategory::remote, what) {}
};

/// A series has zero variance where the statistic divides by it.
class DegenerateError : public Error {
 public:
  explicit DegenerateError(const std::string& what) : Error(ErrorCategory::numerical, what) {}
};

/// Design matrix columns are zero or linearly dependent.
class RankDeficiencyError : public Error {
 public:
  RankDeficiencyError(std::vector<std::string> predictors, const std::string& what)
      : Error(ErrorCategory::numerical, what), predictors_(std::move(predictors)) {}

  /// Names of the predictors involved in the dependency.
  const std::vector<std::string>& predictors() const noexcept { return predictors_; }

 private:
  std::vector<std::string> predictors_;
};

}  // namespace joist
