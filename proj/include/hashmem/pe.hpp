#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace hashmem {

using Key = std::uint32_t;
using Value = std::uint32_t;

/// Reserved key words that encode slot state inside a row.
inline constexpr Key kEmptyKey = 0xFFFFFFFEu;
inline constexpr Key kTombstoneKey = 0xFFFFFFFFu;

inline constexpr bool is_sentinel(Key k) { return k == kEmptyKey || k == kTombstoneKey; }

/// Throws InvalidKeyError for sentinel keys.
void require_legal_key(Key key);

struct KvPair {
  Key key = 0;
  Value value = 0;

  friend bool operator==(const KvPair&, const KvPair&) = default;
};

enum class SlotState : std::uint8_t { Empty, Occupied, Tombstone };

struct Slot {
  Key key = kEmptyKey;
  Value value = 0;
  SlotState state = SlotState::Empty;

  static Slot empty() { return {}; }
  static Slot tombstone() { return {kTombstoneKey, 0, SlotState::Tombstone}; }
  static Slot occupied(Key k, Value v) { return {k, v, SlotState::Occupied}; }

  friend bool operator==(const Slot&, const Slot&) = default;
};

/// Element-oriented image of one subarray row: `capacity` 8-byte slots.
class RowImage {
 public:
  RowImage() = default;
  explicit RowImage(std::size_t capacity) : slots_(capacity) {}

  std::size_t capacity() const { return slots_.size(); }
  std::span<const Slot> slots() const { return slots_; }
  const Slot& operator[](std::size_t i) const { return slots_[i]; }
  Slot& operator[](std::size_t i) { return slots_[i]; }

  /// Little-endian key word then value word per slot; the key word carries the
  /// sentinel for Empty and Tombstone slots.
  std::vector<std::uint8_t> serialize() const;
  static RowImage deserialize(std::span<const std::uint8_t> bytes);

  friend bool operator==(const RowImage&, const RowImage&) = default;

 private:
  std::vector<Slot> slots_;
};

/// Places `pairs` in order at the front of a fresh row; the remainder stays Empty.
RowImage encode_row(std::span<const KvPair> pairs, std::size_t capacity);
/// Occupied slots in slot order.
std::vector<KvPair> decode_row(const RowImage& row);

/// Fixed-length bit vector with word-level AND for plane-at-a-time matching.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

  std::size_t size() const { return bits_; }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  void set(std::size_t i, bool v = true);
  bool any() const;
  std::size_t count() const;
  /// Index of the lowest set bit, if any.
  std::optional<std::size_t> first_set() const;

  BitVector& operator&=(const BitVector& other);
  /// this &= ~other
  BitVector& and_not(const BitVector& other);
  /// Clears every bit outside [start, end).
  void keep_range(std::size_t start, std::size_t end);

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::size_t bits_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Column-oriented image of a row: plane i holds bit i of every slot's key word.
struct BitSlicedRegion {
  std::vector<BitVector> key_planes;    ///< plane 0 = least significant bit
  std::vector<BitVector> value_planes;  ///< always 32 planes
  BitVector occupancy;
  BitVector tombstones;

  std::size_t slot_count() const { return occupancy.size(); }
  std::uint32_t key_bits() const { return static_cast<std::uint32_t>(key_planes.size()); }
};

/// key_bits may be any width in [1, 64]; occupied keys must fit in it.
BitSlicedRegion bitslice_encode(const RowImage& row, std::uint32_t key_bits = 32);
RowImage bitslice_decode(const BitSlicedRegion& region);

enum class PeVariant { AreaOptimized, PerfOptimized };

struct PeConfig {
  PeVariant variant = PeVariant::AreaOptimized;
  std::uint32_t key_bits = 32;
  std::uint32_t value_bits = 32;
  bool cam_mode = false;
  bool include_value_readout_ticks = true;

  void validate() const;
  /// Ticks a performance-optimized scan costs, independent of the row contents.
  std::uint64_t perf_ticks() const;
};

struct MatchResult {
  bool found = false;
  Value value = 0;
  std::optional<std::size_t> column_index;
  std::uint64_t pe_ticks = 0;
};

/// Element-serial scan of slots [start, end). One tick per slot examined; a
/// miss stops at (and counts) the first Empty slot.
MatchResult area_scan(const RowImage& row, Key key, std::size_t start, std::size_t end);
inline MatchResult area_scan(const RowImage& row, Key key) {
  return area_scan(row, key, 0, row.capacity());
}

/// Element-parallel, bit-serial scan. Match flags start as the occupancy mask
/// (restricted to [start, end)) and are narrowed one key plane per tick.
MatchResult perf_scan(const BitSlicedRegion& region, Key key, const PeConfig& config,
                      std::size_t start, std::size_t end);
inline MatchResult perf_scan(const BitSlicedRegion& region, Key key, const PeConfig& config) {
  return perf_scan(region, key, config, 0, region.slot_count());
}

}  // namespace hashmem
