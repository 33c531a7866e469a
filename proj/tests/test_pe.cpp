#include <doctest.h>

#include <random>
#include <vector>

#include "hashmem/errors.hpp"
#include "hashmem/pe.hpp"

using namespace hashmem;

namespace {

RowImage random_row(std::mt19937_64& rng, std::size_t capacity, Key key_limit) {
  RowImage row(capacity);
  std::vector<bool> used(key_limit, false);
  // Packed prefix of Occupied/Tombstone slots, Empty tail.
  const std::size_t used_slots = rng() % (capacity + 1);
  for (std::size_t i = 0; i < used_slots; ++i) {
    if (rng() % 5 == 0) {
      row[i] = Slot::tombstone();
      continue;
    }
    Key k = static_cast<Key>(rng() % key_limit);
    if (used[k]) {
      row[i] = Slot::tombstone();
      continue;
    }
    used[k] = true;
    row[i] = Slot::occupied(k, static_cast<Value>(rng()));
  }
  return row;
}

struct Naive {
  bool found = false;
  Value value = 0;
  std::size_t index = 0;
};

Naive naive_find(const RowImage& row, Key key) {
  for (std::size_t i = 0; i < row.capacity(); ++i) {
    if (row[i].state == SlotState::Occupied && row[i].key == key) return {true, row[i].value, i};
  }
  return {};
}

PeConfig perf_config(std::uint32_t key_bits = 32) {
  PeConfig c;
  c.variant = PeVariant::PerfOptimized;
  c.key_bits = key_bits;
  return c;
}

}  // namespace

TEST_CASE("encode_row examples") {
  const RowImage empty = encode_row({}, 4);
  REQUIRE(empty.capacity() == 4);
  for (const Slot& s : empty.slots()) CHECK(s == Slot::empty());

  const std::vector<KvPair> two{{5, 50}, {7, 70}};
  const RowImage r = encode_row(two, 4);
  CHECK(r[0] == Slot::occupied(5, 50));
  CHECK(r[1] == Slot::occupied(7, 70));
  CHECK(r[2] == Slot::empty());
  CHECK(r[3] == Slot::empty());
  CHECK(decode_row(r) == two);

  const std::vector<KvPair> bad{{kEmptyKey, 1}};
  CHECK_THROWS_AS(encode_row(bad, 4), InvalidKeyError);
  const std::vector<KvPair> too_many{{1, 1}, {2, 2}, {3, 3}};
  CHECK_THROWS_AS(encode_row(too_many, 2), CapacityError);
}

TEST_CASE("encode/decode round trip of 1024 random pairs") {
  std::mt19937_64 rng(11);
  std::vector<KvPair> pairs;
  for (int i = 0; i < 1024; ++i) pairs.push_back({static_cast<Key>(i * 7919u), static_cast<Value>(rng())});
  const RowImage row = encode_row(pairs, 1024);
  CHECK(decode_row(row) == pairs);
  const auto bytes = row.serialize();
  CHECK(bytes.size() == 8192);
  CHECK(RowImage::deserialize(bytes) == row);
}

TEST_CASE("serialized sentinels") {
  RowImage row(3);
  row[0] = Slot::occupied(0x01020304, 0xA0B0C0D0);
  row[1] = Slot::tombstone();
  const auto b = row.serialize();
  CHECK(b[0] == 0x04);
  CHECK(b[3] == 0x01);
  CHECK(b[4] == 0xD0);
  for (int i = 8; i < 12; ++i) CHECK(b[i] == 0xFF);
  CHECK(b[16] == 0xFE);
  CHECK(b[17] == 0xFF);
}

TEST_CASE("bitslice toy planes") {
  RowImage row(2);
  row[0] = Slot::occupied(0b01, 0);
  row[1] = Slot::occupied(0b10, 0);
  const BitSlicedRegion r = bitslice_encode(row, 2);
  REQUIRE(r.key_bits() == 2);
  CHECK(r.key_planes[0].test(0));
  CHECK(!r.key_planes[0].test(1));
  CHECK(!r.key_planes[1].test(0));
  CHECK(r.key_planes[1].test(1));

  const BitSlicedRegion e = bitslice_encode(RowImage(16));
  CHECK(!e.occupancy.any());
  CHECK(e.slot_count() == 16);
}

TEST_CASE("bitslice round trip on random 1024-slot rows") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    RowImage row(1024);
    for (std::size_t i = 0; i < 1024; ++i) {
      switch (rng() % 3) {
        case 0: row[i] = Slot::occupied(static_cast<Key>(rng() % kEmptyKey), static_cast<Value>(rng())); break;
        case 1: row[i] = Slot::tombstone(); break;
        default: break;
      }
    }
    REQUIRE(bitslice_decode(bitslice_encode(row)) == row);
  }
}

TEST_CASE("area_scan examples") {
  const RowImage r = encode_row(std::vector<KvPair>{{5, 50}, {7, 70}}, 8);
  MatchResult m = area_scan(r, 7);
  CHECK(m.found);
  CHECK(m.value == 70);
  CHECK(m.column_index == 1u);
  CHECK(m.pe_ticks == 2);

  m = area_scan(r, 9);
  CHECK(!m.found);
  CHECK(m.pe_ticks == 3);

  RowImage t(4);
  t[0] = Slot::tombstone();
  t[1] = Slot::occupied(7, 70);
  m = area_scan(t, 7);
  CHECK(m.found);
  CHECK(m.pe_ticks == 2);

  CHECK_THROWS_AS(area_scan(r, 7, 3, 2), RangeError);
  CHECK_THROWS_AS(area_scan(r, 7, 0, 9), RangeError);
  CHECK_THROWS_AS(area_scan(r, kTombstoneKey), InvalidKeyError);
}

TEST_CASE("area_scan ticks grow with match position") {
  std::vector<KvPair> pairs;
  for (Key k = 0; k < 1024; ++k) pairs.push_back({k + 100, k});
  const RowImage r = encode_row(pairs, 1024);
  std::uint64_t previous = 0;
  for (std::size_t p = 1; p <= 1024; ++p) {
    const MatchResult m = area_scan(r, pairs[p - 1].key);
    REQUIRE(m.found);
    REQUIRE(m.pe_ticks == p);
    REQUIRE(m.pe_ticks >= previous);
    previous = m.pe_ticks;
  }
  // A full row has no Empty terminator: a miss examines every slot.
  CHECK(area_scan(r, 1).pe_ticks == 1024);
}

TEST_CASE("perf_scan examples") {
  const RowImage r = encode_row(std::vector<KvPair>{{5, 50}, {7, 70}}, 1024);
  const BitSlicedRegion region = bitslice_encode(r);
  PeConfig c = perf_config();
  MatchResult m = perf_scan(region, 7, c);
  CHECK(m.found);
  CHECK(m.value == 70);
  CHECK(m.column_index == 1u);
  CHECK(m.pe_ticks == 64);

  c.cam_mode = true;
  CHECK(perf_scan(region, 7, c).pe_ticks == 2);
  CHECK(perf_scan(region, 9, c).pe_ticks == 2);
  c.include_value_readout_ticks = false;
  CHECK(perf_scan(region, 7, c).pe_ticks == 1);
  c.cam_mode = false;
  CHECK(perf_scan(region, 7, c).pe_ticks == 32);
}

TEST_CASE("perf_scan ticks are independent of occupancy") {
  std::mt19937_64 rng(3);
  const PeConfig c = perf_config();
  for (std::size_t occ : {0u, 1u, 64u, 256u, 1024u}) {
    std::vector<KvPair> pairs;
    for (std::size_t i = 0; i < occ; ++i) pairs.push_back({static_cast<Key>(i * 3 + 1), static_cast<Value>(i)});
    const BitSlicedRegion region = bitslice_encode(encode_row(pairs, 1024));
    CHECK(perf_scan(region, 2, c).pe_ticks == 64);
    if (occ) CHECK(perf_scan(region, pairs.back().key, c).pe_ticks == 64);
  }
}

TEST_CASE("PeConfig validation") {
  PeConfig c;
  c.key_bits = 12;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.key_bits = 32;
  c.cam_mode = true;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.variant = PeVariant::PerfOptimized;
  CHECK_NOTHROW(c.validate());
  CHECK(perf_config(16).perf_ticks() == 48);
}

TEST_CASE("area and perf scans agree exhaustively on toy rows") {
  // Every row of up to 4 slots over the states {Empty, Tombstone, key 0..15}
  // with a packed prefix, probed with every 4-bit key.
  PeConfig c = perf_config(8);
  std::uint64_t rows = 0;
  std::uint64_t mismatches = 0;
  for (std::size_t cap = 1; cap <= 4; ++cap) {
    const std::size_t symbols = 17;  // 0..15 keys, 16 = tombstone
    std::uint64_t combos = 1;
    for (std::size_t i = 0; i < cap; ++i) combos *= symbols + 1;
    for (std::uint64_t code = 0; code < combos; ++code) {
      RowImage row(cap);
      std::uint64_t x = code;
      bool packed = true;
      bool seen_empty = false;
      std::vector<bool> used(16, false);
      for (std::size_t i = 0; i < cap; ++i, x /= symbols + 1) {
        const auto s = x % (symbols + 1);
        if (s == symbols) {
          seen_empty = true;
          continue;
        }
        if (seen_empty) packed = false;
        if (s == 16) {
          row[i] = Slot::tombstone();
        } else {
          if (used[s]) packed = false;
          used[s] = true;
          row[i] = Slot::occupied(static_cast<Key>(s), static_cast<Value>(s * 10 + i));
        }
      }
      if (!packed) continue;
      ++rows;
      const BitSlicedRegion region = bitslice_encode(row, 4);
      for (Key k = 0; k < 16; ++k) {
        const MatchResult a = area_scan(row, k);
        const MatchResult p = perf_scan(region, k, c);
        const Naive n = naive_find(row, k);
        if (a.found != n.found || p.found != n.found || (n.found && (a.value != n.value || p.value != n.value ||
                                                                     a.column_index != n.index ||
                                                                     p.column_index != n.index)))
          ++mismatches;
      }
    }
  }
  CHECK(rows > 1000);
  CHECK(mismatches == 0);
}

TEST_CASE("area and perf scans agree at full scale with sub-ranges") {
  std::mt19937_64 rng(17);
  const PeConfig c = perf_config();
  std::uint64_t mismatches = 0;
  for (int t = 0; t < 50; ++t) {
    const RowImage row = random_row(rng, 1024, 1u << 20);
    const BitSlicedRegion region = bitslice_encode(row);
    const auto live = decode_row(row);
    for (int q = 0; q < 40; ++q) {
      const Key k = (q % 2 == 0 && !live.empty()) ? live[rng() % live.size()].key
                                                  : static_cast<Key>(rng() % (1u << 20));
      const std::size_t start = rng() % 1024;
      const std::size_t end = start + rng() % (1024 - start + 1);
      const MatchResult a = area_scan(row, k, start, end);
      const MatchResult p = perf_scan(region, k, c, start, end);
      Naive n;
      for (std::size_t i = start; i < end; ++i) {
        if (row[i].state == SlotState::Occupied && row[i].key == k) {
          n = {true, row[i].value, i};
          break;
        }
      }
      if (a.found != n.found || p.found != n.found ||
          (n.found && (a.value != n.value || p.value != n.value || p.column_index != n.index)))
        ++mismatches;
      if (p.pe_ticks != 64) ++mismatches;
    }
  }
  CHECK(mismatches == 0);
}
