#include "hashmem/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "hashmem/errors.hpp"
#include "random_util.hpp"

namespace hashmem {

std::vector<KvPair> generate_dataset(const DatasetSpec& spec) {
  if (spec.n_pairs > kKeySpace) {
    throw CapacityError("cannot draw " + std::to_string(spec.n_pairs) + " distinct keys");
  }
  std::mt19937_64 rng(spec.seed);
  std::vector<KvPair> pairs;
  pairs.reserve(spec.n_pairs);
  std::unordered_set<Key> seen;
  seen.reserve(spec.n_pairs);
  while (pairs.size() < spec.n_pairs) {
    const Key k = detail::random_key(rng);
    if (!seen.insert(k).second) continue;
    pairs.push_back({k, static_cast<Value>(rng())});
  }
  return pairs;
}

std::vector<Key> select_probes(std::span<const KvPair> pairs, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) throw RangeError("probe fraction must be in (0, 1]");
  const auto n = static_cast<std::uint64_t>(std::floor(fraction * static_cast<double>(pairs.size())));
  std::vector<Key> keys(pairs.size());
  std::transform(pairs.begin(), pairs.end(), keys.begin(), [](const KvPair& p) { return p.key; });
  // Partial Fisher-Yates: the first n positions become the sample.
  std::mt19937_64 rng(seed);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto j = i + detail::uniform_below(rng, keys.size() - i);
    std::swap(keys[i], keys[j]);
  }
  keys.resize(n);
  return keys;
}

void inject_misses(std::vector<Key>& probes, std::span<const KvPair> pairs, double miss_fraction,
                   std::uint64_t seed) {
  if (miss_fraction < 0.0 || miss_fraction > 1.0) throw RangeError("miss fraction must be in [0, 1]");
  const auto n_miss = static_cast<std::size_t>(std::llround(miss_fraction * static_cast<double>(probes.size())));
  if (n_miss == 0) return;
  std::unordered_set<Key> present;
  present.reserve(pairs.size());
  for (const auto& p : pairs) present.insert(p.key);
  if (present.size() >= kKeySpace) throw CapacityError("no absent keys left to probe");
  std::mt19937_64 rng(seed ^ 0x6D69737365730000ull);
  for (std::size_t i = 0; i < n_miss; ++i) {
    Key k = detail::random_key(rng);
    while (present.contains(k)) k = detail::random_key(rng);
    probes[i] = k;
  }
  // Spread the misses through the probe sequence.
  for (std::size_t i = probes.size(); i > 1; --i) {
    std::swap(probes[i - 1], probes[detail::uniform_below(rng, i)]);
  }
}

namespace {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace

std::vector<Key> ingest_wordlist(std::istream& in, std::uint64_t n_words) {
  std::vector<Key> keys;
  std::unordered_map<std::string, Key> dictionary;
  std::unordered_set<Key> taken;
  std::string line;
  for (std::uint64_t read = 0; read < n_words && std::getline(in, line); ++read) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (dictionary.contains(line)) continue;
    const std::uint64_t h = fnv1a64(line);
    Key k = static_cast<Key>(h ^ (h >> 32));
    while (is_sentinel(k) || taken.contains(k)) ++k;
    taken.insert(k);
    dictionary.emplace(line, k);
    keys.push_back(k);
  }
  if (in.bad()) throw IoError("error while reading word list");
  return keys;
}

std::vector<Key> ingest_wordlist(const std::filesystem::path& path, std::uint64_t n_words) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word list " + path.string());
  return ingest_wordlist(in, n_words);
}

namespace {

constexpr char kMagic[4] = {'H', 'M', 'K', 'V'};

void put_le(std::ostream& out, std::uint64_t v, int bytes) {
  char buf[8];
  for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, bytes);
}

std::uint64_t get_le(std::istream& in, int bytes) {
  unsigned char buf[8] = {};
  if (!in.read(reinterpret_cast<char*>(buf), bytes)) throw IoError("dataset truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= std::uint64_t{buf[i]} << (8 * i);
  return v;
}

}  // namespace

void write_dataset(std::ostream& out, std::span<const KvPair> pairs) {
  out.write(kMagic, 4);
  put_le(out, kDatasetVersion, 4);
  put_le(out, pairs.size(), 8);
  for (const auto& p : pairs) {
    put_le(out, p.key, 4);
    put_le(out, p.value, 4);
  }
  if (!out) throw IoError("failed writing dataset");
}

std::vector<KvPair> read_dataset(std::istream& in) {
  char magic[4] = {};
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) {
    throw IoError("not a dataset file (bad magic)");
  }
  const auto version = get_le(in, 4);
  if (version != kDatasetVersion) throw IoError("unsupported dataset version " + std::to_string(version));
  const auto n = get_le(in, 8);
  std::vector<KvPair> pairs;
  pairs.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n, 1u << 24)));
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto k = static_cast<Key>(get_le(in, 4));
    const auto v = static_cast<Value>(get_le(in, 4));
    pairs.push_back({k, v});
  }
  return pairs;
}

void save_dataset(const std::filesystem::path& path, std::span<const KvPair> pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path.string());
  write_dataset(out, pairs);
}

std::vector<KvPair> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  return read_dataset(in);
}

}  // namespace hashmem
