#pragma once

#include <stdexcept>

namespace plas {

// Raised when a k-NN estimate is requested for an arm with no observations.
struct EstimatorUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A history record that cannot produce an AIPW score (zero propensity).
struct InvalidRecord : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidConfig : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace plas
