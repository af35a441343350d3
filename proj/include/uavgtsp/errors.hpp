#pragma once

#include <stdexcept>
#include <string>

namespace uavgtsp {

// Base of every error the library throws. The CLI maps each subclass to a
// distinct exit code (see tools/uavgtsp.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes do not agree for the requested operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A caller broke a documented precondition (non-scalar loss, all-masked
// logits, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Data that parsed fine but violates an invariant (overlapping clusters,
// tour visiting a cluster twice, bad config values).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed input text.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Problem too large for the requested solver.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Rejection sampling could not place the clusters.
class GenerationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// NaN/inf reached the optimizer.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace uavgtsp
