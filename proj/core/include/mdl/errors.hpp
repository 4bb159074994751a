#pragma once

#include <stdexcept>
#include <string>

namespace mdl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A decision could not be certified before the precision cap was reached.
class IndeterminateAtPrecision : public Error {
 public:
  using Error::Error;
};

class RangeExceeded : public Error {
 public:
  using Error::Error;
};

class NotMonotone : public Error {
 public:
  using Error::Error;
};

class ZeroMass : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mdl
