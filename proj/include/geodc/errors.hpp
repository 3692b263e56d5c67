#pragma once

#include <stdexcept>
#include <string>

namespace geodc {

// Bad input data: malformed files, invalid parameter combinations, broken
// invariants of a config object. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Argument outside an operation's stated precondition.
class DomainError : public std::domain_error {
public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// A well-formed scenario that has no feasible solution. Carries the name of
// the violated constraint. CLI maps this to exit code 1.
class InfeasibleError : public std::runtime_error {
public:
  InfeasibleError(const std::string& constraint, const std::string& what)
      : std::runtime_error(what), constraint_(constraint) {}
  const std::string& constraint() const { return constraint_; }

private:
  std::string constraint_;
};

// A condition that the algorithms' convergence proofs rule out. Raising this
// means a bug, not bad input; it is never caught internally.
class InternalError : public std::logic_error {
public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace geodc
