#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "hashmem/pe.hpp"

namespace hashmem {

struct DatasetSpec {
  std::uint64_t n_pairs = 1'000'000;
  double probe_fraction = 0.1;
  std::uint64_t seed = 42;
};

/// Number of legal (non-sentinel) 32-bit keys.
inline constexpr std::uint64_t kKeySpace = (std::uint64_t{1} << 32) - 2;

/// Unique, uniformly distributed, sentinel-free keys with arbitrary values.
/// Identical for equal seeds. Throws CapacityError past the key space.
std::vector<KvPair> generate_dataset(const DatasetSpec& spec);

/// floor(fraction * n) distinct keys sampled without replacement, in shuffled order.
std::vector<Key> select_probes(std::span<const KvPair> pairs, double fraction, std::uint64_t seed);

/// Replaces round(miss_fraction * probes) probes with keys absent from `pairs`.
void inject_misses(std::vector<Key>& probes, std::span<const KvPair> pairs, double miss_fraction,
                   std::uint64_t seed);

/// Dictionary-encodes the first `n_words` lines of a word list: one key per
/// distinct word, in first-occurrence order. Keys are a 64-bit FNV-1a hash
/// folded to 32 bits; collisions and sentinels are bumped to the next free key.
std::vector<Key> ingest_wordlist(std::istream& in, std::uint64_t n_words = 350'000);
std::vector<Key> ingest_wordlist(const std::filesystem::path& path, std::uint64_t n_words = 350'000);

/// Binary dataset: "HMKV", u32 version, u64 count, then (u32 key, u32 value)
/// records, all little-endian.
inline constexpr std::uint32_t kDatasetVersion = 1;
void write_dataset(std::ostream& out, std::span<const KvPair> pairs);
std::vector<KvPair> read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, std::span<const KvPair> pairs);
std::vector<KvPair> load_dataset(const std::filesystem::path& path);

}  // namespace hashmem
