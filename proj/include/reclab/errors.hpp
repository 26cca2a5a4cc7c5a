#pragma once

#include <stdexcept>
#include <string>

namespace reclab {

/// Invalid user input: bad parameters, malformed files, unknown config keys.
/// The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical safeguard tripped (rejection cap, enumeration cap, search
/// budget). The CLI maps this to exit code 3.
class NumericalGuardError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Objects of incompatible shape were combined (interval, state count,
/// dimension).
class ShapeError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A utility was evaluated outside its natural domain (fractional power of a
/// negative coordinate).
class DomainViolation : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

} // namespace reclab
