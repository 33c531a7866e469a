#include "hashmem/hopscotch.hpp"

#include <bit>

#include "hashmem/errors.hpp"

namespace hashmem {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

}  // namespace

HopscotchTable::HopscotchTable(std::size_t capacity, std::uint32_t neighborhood, std::uint64_t seed)
    : neighborhood_(neighborhood), seed_(seed) {
  if (neighborhood == 0 || neighborhood > 64) throw RangeError("neighborhood must be in [1, 64]");
  const std::size_t cap = std::bit_ceil(std::max<std::size_t>(capacity, neighborhood));
  slots_.resize(cap);
  hop_info_.assign(cap, 0);
  mask_ = cap - 1;
}

std::size_t HopscotchTable::home_of(Key key) const {
  return static_cast<std::size_t>(mix64(std::uint64_t{key} ^ seed_)) & mask_;
}

std::optional<Value> HopscotchTable::lookup(Key key) const {
  const std::size_t home = home_of(key);
  for (std::uint64_t bits = hop_info_[home]; bits; bits &= bits - 1) {
    const Slot& s = slots_[wrap(home + static_cast<std::size_t>(std::countr_zero(bits)))];
    if (s.key == key) return s.value;
  }
  return std::nullopt;
}

HopscotchStatus HopscotchTable::insert(Key key, Value value) {
  const std::size_t home = home_of(key);
  for (std::uint64_t bits = hop_info_[home]; bits; bits &= bits - 1) {
    Slot& s = slots_[wrap(home + static_cast<std::size_t>(std::countr_zero(bits)))];
    if (s.key == key) {
      s.value = value;
      return HopscotchStatus::Updated;
    }
  }

  // Linear probe for the nearest free slot.
  std::size_t free = home;
  std::size_t probed = 0;
  while (slots_[free].occupied) {
    if (++probed == capacity()) return HopscotchStatus::TableFull;
    free = wrap(free + 1);
  }

  // Hop the free slot backwards until it lies inside the home neighborhood.
  while (distance(home, free) >= neighborhood_) {
    bool moved = false;
    for (std::size_t d = neighborhood_ - 1; d > 0 && !moved; --d) {
      const std::size_t bucket = wrap(free - d);
      const std::uint64_t movable = hop_info_[bucket] & ((std::uint64_t{1} << d) - 1);
      if (!movable) continue;
      const auto j = static_cast<std::size_t>(std::countr_zero(movable));
      const std::size_t from = wrap(bucket + j);
      slots_[free] = slots_[from];
      slots_[from].occupied = false;
      hop_info_[bucket] &= ~(std::uint64_t{1} << j);
      hop_info_[bucket] |= std::uint64_t{1} << d;
      free = from;
      moved = true;
    }
    if (!moved) return HopscotchStatus::TableFull;
  }

  slots_[free] = {key, value, true};
  hop_info_[home] |= std::uint64_t{1} << distance(home, free);
  ++size_;
  return HopscotchStatus::Inserted;
}

bool HopscotchTable::remove(Key key) {
  const std::size_t home = home_of(key);
  for (std::uint64_t bits = hop_info_[home]; bits; bits &= bits - 1) {
    const auto j = static_cast<std::size_t>(std::countr_zero(bits));
    Slot& s = slots_[wrap(home + j)];
    if (s.key == key) {
      s.occupied = false;
      hop_info_[home] &= ~(std::uint64_t{1} << j);
      --size_;
      return true;
    }
  }
  return false;
}

std::string HopscotchTable::check_invariant() const {
  std::size_t occupied = 0;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (!slots_[i].occupied) continue;
    ++occupied;
    const std::size_t home = home_of(slots_[i].key);
    const std::size_t d = distance(home, i);
    if (d >= neighborhood_) {
      return "slot " + std::to_string(i) + " is " + std::to_string(d) + " away from its home";
    }
    if (!((hop_info_[home] >> d) & 1u)) {
      return "slot " + std::to_string(i) + " missing from hop_info of bucket " + std::to_string(home);
    }
  }
  for (std::size_t b = 0; b < hop_info_.size(); ++b) {
    if (neighborhood_ < 64 && (hop_info_[b] >> neighborhood_) != 0) {
      return "bucket " + std::to_string(b) + " has bits beyond the neighborhood";
    }
    for (std::uint64_t bits = hop_info_[b]; bits; bits &= bits - 1) {
      const std::size_t s = wrap(b + static_cast<std::size_t>(std::countr_zero(bits)));
      if (!slots_[s].occupied || home_of(slots_[s].key) != b) {
        return "bucket " + std::to_string(b) + " flags slot " + std::to_string(s) +
               " which does not hold one of its keys";
      }
    }
  }
  if (occupied != size_) return "size counter disagrees with occupied slots";
  return {};
}

HopscotchTable HopscotchTable::grown() const {
  for (std::size_t cap = capacity() * 2;; cap *= 2) {
    HopscotchTable bigger(cap, neighborhood_, seed_);
    bool ok = true;
    for (const Slot& s : slots_) {
      if (s.occupied && bigger.insert(s.key, s.value) == HopscotchStatus::TableFull) {
        ok = false;
        break;
      }
    }
    if (ok) return bigger;
  }
}

}  // namespace hashmem
