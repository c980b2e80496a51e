#pragma once

#include <stdexcept>
#include <string>

namespace erlb {

/// Malformed or inconsistent input: missing files or columns, bad CSV rows,
/// datasets violating their declared invariants. CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Violation of an internal consistency contract: bad reduce routing, a plan
/// applied to a different dataset than its BDM, delivery gaps, count
/// mismatches. CLI exit code 4.
class InvariantError : public std::logic_error {
 public:
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace erlb
