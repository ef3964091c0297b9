#pragma once

#include <stdexcept>
#include <string>

namespace packdb {

// A caller broke a documented precondition (unsorted input, out-of-range
// slot, double free, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Encoded bytes are inconsistent with their metadata.
class CorruptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A database file has a bad magic, an unknown version or is truncated.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The tree was mutated after the cursor was positioned.
class CursorInvalidated : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The store cannot grow any further (page id space or page limit exhausted).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] inline void contract_violation(const std::string& what) {
  throw ContractViolation(what);
}

}  // namespace packdb
