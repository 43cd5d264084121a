#pragma once

#include <stdexcept>
#include <string>

namespace driftbandit {

// Bad configuration or mismatched dimensions. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller broke a sequencing contract (e.g. observe() without choose()).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// An internal invariant failed; indicates a bug rather than bad input.
class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace driftbandit
