#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>

#include "hashmem/dram.hpp"

namespace hashmem {

/// Flat `name = number` file. Blank lines and `#` comments are ignored.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.contains(key); }

  double require_number(const std::string& key) const;
  std::uint64_t require_unsigned(const std::string& key) const;
  std::optional<double> number(const std::string& key) const;
  std::optional<std::uint64_t> unsigned_value(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Everything the simulated backends need besides the PE variant.
struct SimConfig {
  DramGeometry geometry;
  DramTiming timing;
  PagePolicy page_policy = PagePolicy::Closed;
  double cpu_scan_ns_per_line = 1.0;
  std::uint32_t key_bits = 32;
  std::uint32_t value_bits = 32;
  bool include_value_readout_ticks = true;

  /// Geometry and timing keys are mandatory; the rest fall back to the defaults above.
  static SimConfig from(const KeyValueConfig& kv);
  static SimConfig load(const std::filesystem::path& path);

  /// Renders the config in the same format `load` accepts.
  std::string to_text() const;
};

}  // namespace hashmem
