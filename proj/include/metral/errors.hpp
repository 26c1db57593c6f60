#pragma once

#include <stdexcept>
#include <string>

namespace metral {

/// Process exit codes shared between library errors and the CLI.
enum class ExitCode : int {
  ok = 0,
  failure = 1,
  parse = 2,
  axiom = 3,
  non_unital = 4,
  search_budget = 5,
};

/// Base class for all library errors; carries the exit code the CLI maps it to.
class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Malformed input file or command line.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ExitCode::parse, what) {}
};

/// The algebra violates a structural axiom (commutativity, form
/// associativity, or positive definiteness of the Gram matrix).
class AxiomError : public Error {
 public:
  explicit AxiomError(const std::string& what) : Error(ExitCode::axiom, what) {}
};

/// An operation that needs a unit element was run on a non-unital algebra.
class NonUnitalError : public Error {
 public:
  explicit NonUnitalError(const std::string& what)
      : Error(ExitCode::non_unital, what) {}
};

/// The idempotent search exhausted its budget without producing the data an
/// operation depends on.
class SearchBudgetError : public Error {
 public:
  explicit SearchBudgetError(const std::string& what)
      : Error(ExitCode::search_budget, what) {}
};

/// An operation restricted to minimal algebras was run on an algebra whose
/// minimality test failed.
class MinimalityError : public Error {
 public:
  explicit MinimalityError(const std::string& what)
      : Error(ExitCode::failure, what) {}
};

}  // namespace metral
