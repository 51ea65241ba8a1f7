#pragma once

#include <stdexcept>
#include <string>

namespace spinlattice {

/// Requested size exceeds what the dense register or oracle can hold.
class CapacityError : public std::length_error {
  public:
    using std::length_error::length_error;
};

/// Site or register index outside the valid range.
class IndexError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

/// Input is structurally inconsistent (non-unitary matrix, size mismatch).
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Argument violates an operation's precondition.
class ArgumentError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// The request cannot be satisfied (e.g. more atoms than lattice sites).
class InfeasibleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace spinlattice
