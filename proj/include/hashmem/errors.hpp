#pragma once

#include <stdexcept>
#include <string>

namespace hashmem {

/// Index or address outside the configured geometry / slot range.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Key collides with one of the reserved slot sentinels.
class InvalidKeyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Too many elements for the target container.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller asked for something the interface refuses (e.g. mixed time domains).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hashmem
