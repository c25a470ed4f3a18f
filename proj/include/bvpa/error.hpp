#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace bvpa {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text or file (expression syntax, JSON, PGM).
class InputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : InputError(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownIdentifierError : public ParseError {
 public:
  UnknownIdentifierError(const std::string& name, std::size_t offset)
      : ParseError("unknown identifier '" + name + "'", offset), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// A documented precondition of an operation does not hold. `check()` names it.
class PreconditionError : public Error {
 public:
  PreconditionError(std::string check, const std::string& what)
      : Error(check + ": " + what), check_(std::move(check)) {}
  const std::string& check() const noexcept { return check_; }

 private:
  std::string check_;
};

class DegenerateSimplexError : public PreconditionError {
 public:
  explicit DegenerateSimplexError(const std::string& what)
      : PreconditionError("non_degenerate_simplex", what) {}
};

/// Evaluation outside an expression's natural domain.
class MathDomainError : public PreconditionError {
 public:
  explicit MathDomainError(const std::string& what) : PreconditionError("math_domain", what) {}
};

/// A post-condition or self-check of a construction failed.
class CheckFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace bvpa
