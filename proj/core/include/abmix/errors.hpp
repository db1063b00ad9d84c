#pragma once

#include <stdexcept>
#include <string>

namespace abmix {

/// Shape/extent mismatch between tensors or network wiring.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Invalid user-supplied configuration (non-positive learning rate, empty ranges, ...).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation was violated by the caller.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Non-finite values or numeric breakdown inside an operation.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input sits on the boundary of a transform's domain (simplex corner, tied order).
struct BoundaryError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Parameter outside the mathematical domain of a sampler or density.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// File format or filesystem failure.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace abmix
