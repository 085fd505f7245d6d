#pragma once

#include <stdexcept>
#include <string>

namespace fishmonger {

// Invalid user-supplied configuration (curve parameters, config files, flags).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Quadrature failed to reach the requested tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The curve produced an impossible branch distribution (non-monotone p).
class CurveValidityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-of-order calls on the mechanism state machine.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class PolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fishmonger
