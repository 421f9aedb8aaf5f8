#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gapforge {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed delimited text. `row()` is the 1-based record number, header = 1.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row) : Error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

/// An observed cell that cannot be read as the kind its column requires.
class TypeMismatchError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NameError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class UndefinedStatisticError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class TransformError : public Error {
 public:
  using Error::Error;
};

class EncodeError : public Error {
 public:
  using Error::Error;
};

class PredictError : public Error {
 public:
  using Error::Error;
};

class PlanError : public Error {
 public:
  using Error::Error;
};

/// A JSON spec document that fails validation. `field()` names the offending key.
class SpecError : public Error {
 public:
  SpecError(const std::string& field, const std::string& what)
      : Error("field '" + field + "': " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace gapforge
