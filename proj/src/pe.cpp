#include "hashmem/pe.hpp"

#include <bit>
#include <string>

#include "hashmem/errors.hpp"

namespace hashmem {

void require_legal_key(Key key) {
  if (is_sentinel(key)) {
    throw InvalidKeyError("key " + std::to_string(key) + " is a reserved slot sentinel");
  }
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{in[at + i]} << (8 * i);
  return v;
}

void check_range(std::size_t start, std::size_t end, std::size_t capacity) {
  if (start > end || end > capacity) {
    throw RangeError("slot range [" + std::to_string(start) + "," + std::to_string(end) +
                     ") outside capacity " + std::to_string(capacity));
  }
}

}  // namespace

std::vector<std::uint8_t> RowImage::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(slots_.size() * 8);
  for (const Slot& s : slots_) {
    switch (s.state) {
      case SlotState::Empty:
        put_u32(out, kEmptyKey);
        put_u32(out, 0);
        break;
      case SlotState::Tombstone:
        put_u32(out, kTombstoneKey);
        put_u32(out, 0);
        break;
      case SlotState::Occupied:
        put_u32(out, s.key);
        put_u32(out, s.value);
        break;
    }
  }
  return out;
}

RowImage RowImage::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 8 != 0) throw RangeError("row image must be a multiple of 8 bytes");
  RowImage row(bytes.size() / 8);
  for (std::size_t i = 0; i < row.capacity(); ++i) {
    const Key k = get_u32(bytes, 8 * i);
    const Value v = get_u32(bytes, 8 * i + 4);
    if (k == kEmptyKey) {
      row[i] = Slot::empty();
    } else if (k == kTombstoneKey) {
      row[i] = Slot::tombstone();
    } else {
      row[i] = Slot::occupied(k, v);
    }
  }
  return row;
}

RowImage encode_row(std::span<const KvPair> pairs, std::size_t capacity) {
  if (pairs.size() > capacity) {
    throw CapacityError(std::to_string(pairs.size()) + " pairs exceed row capacity " +
                        std::to_string(capacity));
  }
  RowImage row(capacity);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    require_legal_key(pairs[i].key);
    row[i] = Slot::occupied(pairs[i].key, pairs[i].value);
  }
  return row;
}

std::vector<KvPair> decode_row(const RowImage& row) {
  std::vector<KvPair> out;
  for (const Slot& s : row.slots()) {
    if (s.state == SlotState::Occupied) out.push_back({s.key, s.value});
  }
  return out;
}

void BitVector::set(std::size_t i, bool v) {
  const std::uint64_t mask = std::uint64_t{1} << (i % 64);
  if (v) {
    words_[i / 64] |= mask;
  } else {
    words_[i / 64] &= ~mask;
  }
}

bool BitVector::any() const {
  for (auto w : words_) {
    if (w) return true;
  }
  return false;
}

std::size_t BitVector::count() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::optional<std::size_t> BitVector::first_set() const {
  for (std::size_t w = 0; w < words_.size(); ++w) {
    if (words_[w]) return w * 64 + static_cast<std::size_t>(std::countr_zero(words_[w]));
  }
  return std::nullopt;
}

BitVector& BitVector::operator&=(const BitVector& other) {
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
  return *this;
}

BitVector& BitVector::and_not(const BitVector& other) {
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= ~other.words_[w];
  return *this;
}

void BitVector::keep_range(std::size_t start, std::size_t end) {
  for (std::size_t w = 0; w < words_.size(); ++w) {
    const std::size_t lo = w * 64;
    const std::size_t hi = lo + 64;
    if (hi <= start || lo >= end) {
      words_[w] = 0;
      continue;
    }
    std::uint64_t mask = ~std::uint64_t{0};
    if (start > lo) mask &= ~std::uint64_t{0} << (start - lo);
    if (end < hi) mask &= ~std::uint64_t{0} >> (hi - end);
    words_[w] &= mask;
  }
}

BitSlicedRegion bitslice_encode(const RowImage& row, std::uint32_t key_bits) {
  if (key_bits == 0 || key_bits > 64) throw RangeError("key_bits must be in [1, 64]");
  const std::size_t n = row.capacity();
  BitSlicedRegion region;
  region.key_planes.assign(key_bits, BitVector(n));
  region.value_planes.assign(32, BitVector(n));
  region.occupancy = BitVector(n);
  region.tombstones = BitVector(n);

  for (std::size_t c = 0; c < n; ++c) {
    const Slot& s = row[c];
    if (s.state == SlotState::Tombstone) region.tombstones.set(c);
    if (s.state != SlotState::Occupied) continue;
    if (key_bits < 32 && (s.key >> key_bits) != 0) {
      throw RangeError("key " + std::to_string(s.key) + " does not fit in " +
                       std::to_string(key_bits) + " bits");
    }
    region.occupancy.set(c);
    for (std::uint32_t b = 0; b < key_bits && b < 32; ++b) {
      if ((s.key >> b) & 1u) region.key_planes[b].set(c);
    }
    for (std::uint32_t b = 0; b < 32; ++b) {
      if ((s.value >> b) & 1u) region.value_planes[b].set(c);
    }
  }
  return region;
}

RowImage bitslice_decode(const BitSlicedRegion& region) {
  const std::size_t n = region.slot_count();
  RowImage row(n);
  for (std::size_t c = 0; c < n; ++c) {
    if (region.tombstones.test(c)) {
      row[c] = Slot::tombstone();
      continue;
    }
    if (!region.occupancy.test(c)) continue;
    Key k = 0;
    for (std::uint32_t b = 0; b < region.key_bits() && b < 32; ++b) {
      if (region.key_planes[b].test(c)) k |= Key{1} << b;
    }
    Value v = 0;
    for (std::uint32_t b = 0; b < region.value_planes.size(); ++b) {
      if (region.value_planes[b].test(c)) v |= Value{1} << b;
    }
    row[c] = Slot::occupied(k, v);
  }
  return row;
}

void PeConfig::validate() const {
  auto legal_width = [](std::uint32_t b) { return b == 8 || b == 16 || b == 32 || b == 64; };
  if (!legal_width(key_bits) || !legal_width(value_bits)) {
    throw ConfigError("key_bits and value_bits must be one of 8, 16, 32, 64");
  }
  if (cam_mode && variant != PeVariant::PerfOptimized) {
    throw ConfigError("cam_mode requires the performance-optimized PE");
  }
}

std::uint64_t PeConfig::perf_ticks() const {
  if (cam_mode) return include_value_readout_ticks ? 2 : 1;
  return key_bits + (include_value_readout_ticks ? value_bits : 0);
}

MatchResult area_scan(const RowImage& row, Key key, std::size_t start, std::size_t end) {
  check_range(start, end, row.capacity());
  require_legal_key(key);
  MatchResult r;
  for (std::size_t i = start; i < end; ++i) {
    const Slot& s = row[i];
    ++r.pe_ticks;
    if (s.state == SlotState::Empty) break;
    if (s.state == SlotState::Occupied && s.key == key) {
      r.found = true;
      r.value = s.value;
      r.column_index = i;
      break;
    }
  }
  return r;
}

MatchResult perf_scan(const BitSlicedRegion& region, Key key, const PeConfig& config,
                      std::size_t start, std::size_t end) {
  check_range(start, end, region.slot_count());
  require_legal_key(key);
  MatchResult r;
  r.pe_ticks = config.perf_ticks();

  const std::uint32_t planes = region.key_bits();
  // A key wider than the stored planes can never match.
  if (planes < 32 && (key >> planes) != 0) return r;

  BitVector match = region.occupancy;
  match.keep_range(start, end);
  for (std::uint32_t b = 0; b < planes; ++b) {
    const bool bit = b < 32 && ((key >> b) & 1u);
    if (bit) {
      match &= region.key_planes[b];
    } else {
      match.and_not(region.key_planes[b]);
    }
  }
  if (auto col = match.first_set()) {
    r.found = true;
    r.column_index = *col;
    for (std::uint32_t b = 0; b < region.value_planes.size(); ++b) {
      if (region.value_planes[b].test(*col)) r.value |= Value{1} << b;
    }
  }
  return r;
}

}  // namespace hashmem
