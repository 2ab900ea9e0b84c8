#pragma once

#include <stdexcept>
#include <string>

namespace cautious {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Domain mismatch between tables (unknown variable, cardinality clash).
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Positive mass divided by zero mass. Only a corrupted state produces this.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

// Malformed or invalid model document.
class ModelError : public Error {
 public:
  using Error::Error;
};

// Bad finding or hypothesis: unknown variable/state, duplicate id, bad likelihood.
class EvidenceError : public Error {
 public:
  using Error::Error;
};

// A normalizing readout was requested while the evidence has zero probability.
class ImpossibleEvidence : public Error {
 public:
  using Error::Error;
};

class ImpossibleHypothesis : public ImpossibleEvidence {
 public:
  using ImpossibleEvidence::ImpossibleEvidence;
};

// The requested evidence subset cannot be read off the stored tables.
class NotAccessible : public Error {
 public:
  using Error::Error;
};

// Brute-force enumeration would exceed the configured state-space cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace cautious
