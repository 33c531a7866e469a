#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hashmem/pe.hpp"

namespace hashmem {

enum class HopscotchStatus { Inserted, Updated, TableFull };

/// Open-addressing table that keeps every key within `neighborhood - 1` slots
/// (cyclically) of its home bucket. hop_info[b] bit j is set iff slot b + j
/// holds a key whose home is b.
class HopscotchTable {
 public:
  static constexpr std::uint32_t kDefaultNeighborhood = 32;

  /// `capacity` is rounded up to a power of two; `neighborhood` must be in [1, 64]
  /// and no larger than the table.
  explicit HopscotchTable(std::size_t capacity, std::uint32_t neighborhood = kDefaultNeighborhood,
                          std::uint64_t seed = 0);

  /// TableFull when no free slot can be brought into the key's neighborhood.
  HopscotchStatus insert(Key key, Value value);
  std::optional<Value> lookup(Key key) const;
  bool remove(Key key);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return slots_.size(); }
  std::uint32_t neighborhood() const { return neighborhood_; }
  double load_factor() const { return static_cast<double>(size_) / static_cast<double>(capacity()); }
  std::size_t home_of(Key key) const;

  /// Returns an empty string when the neighborhood invariant holds for every
  /// slot and bitmap bit, else a description of the first violation.
  std::string check_invariant() const;

  /// Same contents in a table of twice the capacity.
  HopscotchTable grown() const;

 private:
  struct Slot {
    Key key = 0;
    Value value = 0;
    bool occupied = false;
  };

  std::size_t wrap(std::size_t i) const { return i & mask_; }
  std::size_t distance(std::size_t from, std::size_t to) const { return wrap(to - from); }

  std::vector<Slot> slots_;
  std::vector<std::uint64_t> hop_info_;
  std::uint32_t neighborhood_;
  std::uint64_t seed_;
  std::size_t mask_;
  std::size_t size_ = 0;
};

}  // namespace hashmem
