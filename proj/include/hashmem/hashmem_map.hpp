#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hashmem/dram.hpp"
#include "hashmem/page_store.hpp"
#include "hashmem/pe.hpp"
#include "hashmem/rlu.hpp"

namespace hashmem {

using BucketId = std::uint64_t;

struct HashConfig {
  std::uint64_t bucket_count = 1;
  std::uint64_t multiplier = 0x9E3779B97F4A7C15ull;  ///< odd; 2^64 / golden ratio
  std::uint64_t seed = 0;

  void validate() const;
};

/// bucket = ((key * multiplier) xor seed) >> 32, reduced mod bucket_count.
BucketId hash_key(Key key, const HashConfig& config);

/// Bucket count that puts `n_pairs` at half a page per bucket on average.
std::uint64_t default_bucket_count(std::uint64_t n_pairs, std::uint32_t page_capacity);

struct ChainEntry {
  PageId page_id = 0;
  std::uint32_t start = 0;
  std::uint32_t end = 0;
  std::uint32_t fill = 0;  ///< non-Empty slots, packed at the front of the range

  std::uint32_t size() const { return end - start; }
  bool full() const { return fill == size(); }

  friend bool operator==(const ChainEntry&, const ChainEntry&) = default;
};

struct PageChain {
  std::vector<ChainEntry> entries;
  std::uint64_t live = 0;
  std::uint64_t tombstones = 0;
};

/// Lowest-id-first page allocator over [0, limit).
class PageAllocator {
 public:
  explicit PageAllocator(std::uint64_t limit) : limit_(limit) {}

  std::optional<PageId> allocate();
  void release(PageId id);
  std::uint64_t allocated() const { return allocated_; }
  std::uint64_t limit() const { return limit_; }

 private:
  std::uint64_t limit_;
  PageId next_fresh_ = 0;
  std::set<PageId> released_;
  std::uint64_t allocated_ = 0;
};

/// Bucket -> page chain records. Only buckets that ever received an insert appear.
class Bookkeeping {
 public:
  const PageChain* find(BucketId bucket) const;
  PageChain& chain(BucketId bucket) { return chains_[bucket]; }
  const std::map<BucketId, PageChain>& chains() const { return chains_; }

  /// `bucket_id: page_id[start,end) page_id[start,end) ...`, one bucket per line.
  void write_sidecar(std::ostream& out) const;
  /// Parses the sidecar; fill counters are left at zero.
  static Bookkeeping read_sidecar(std::istream& in);

 private:
  friend class HashMemMap;
  std::map<BucketId, PageChain> chains_;
};

enum class InsertStatus { Inserted, Updated, AllocationFailure };
enum class DeleteStatus { Deleted, NotFound };

struct ProbeOutcome {
  ProbeStatus status = ProbeStatus::NotFound;
  Value value = 0;
  double latency_ns = 0.0;
  std::uint32_t commands = 0;

  bool found() const { return status == ProbeStatus::Found; }
};

struct BucketHistogram {
  std::vector<std::uint64_t> lengths;  ///< live slots per bucket
  double mean = 0.0;
  std::uint64_t max = 0;
  double coefficient_of_variation = 0.0;  ///< population stddev / mean; 0 for an empty map
};

struct CoLocationReport {
  std::uint64_t candidates = 0;
  std::uint64_t buckets_relocated = 0;
  std::uint64_t pages_before = 0;
  std::uint64_t pages_after = 0;
  /// Buckets that ended up sharing each page.
  std::vector<std::pair<PageId, std::vector<BucketId>>> shared_pages;
};

/// The hashmap front-end over page-granularity buckets.
class HashMemMap {
 public:
  /// `page_limit` caps the number of allocatable pages (0 = whole geometry).
  /// `sliced_key_bits` > 0 mirrors every page in the bit-sliced layout.
  HashMemMap(const DramGeometry& geometry, const HashConfig& hash, std::uint64_t page_limit = 0,
             std::uint32_t sliced_key_bits = 0);

  InsertStatus insert(Key key, Value value);
  DeleteStatus erase(Key key);

  /// Walks the bucket's chain through `rlu`, one command per chain entry,
  /// stopping at the first page that reports a match.
  ProbeOutcome probe(Key key, Rlu& rlu) const;
  /// Same walk under a parallelism policy; `not_before` is the earliest issue time.
  ProbeOutcome probe(Key key, Rlu& rlu, ParallelismPolicy policy, double not_before,
                     std::vector<ProbeResult>* results = nullptr) const;

  /// Untimed lookup straight from the page contents.
  std::optional<Value> find(Key key) const;

  /// Commands a probe of `key` would issue if it missed everywhere.
  std::vector<ProbeCommand> commands_for(Key key) const;

  BucketHistogram bucket_histogram() const;

  /// Packs under-utilized single-page buckets (live length <= threshold) into
  /// shared pages by first-fit decreasing. Every relocated bucket occupies one
  /// contiguous range; tombstones of relocated buckets are dropped.
  CoLocationReport co_locate_buckets(std::uint32_t threshold);

  BucketId bucket_of(Key key) const { return hash_key(key, hash_); }
  const PageChain* chain(BucketId bucket) const { return books_.find(bucket); }
  const Bookkeeping& bookkeeping() const { return books_; }
  const PageStore& store() const { return store_; }
  const HashConfig& hash_config() const { return hash_; }
  const DramGeometry& geometry() const { return geometry_; }
  std::uint32_t page_capacity() const { return geometry_.page_capacity(); }
  std::uint64_t size() const { return live_; }
  std::uint64_t pages_allocated() const { return allocator_.allocated(); }
  /// Occupied + tombstone slots across all pages.
  std::uint64_t used_slots() const;

  /// Live pairs in chain order (bucket ascending, page order, slot order).
  std::vector<KvPair> export_pairs() const;
  /// Rebuilds a map from exported pairs and the bookkeeping sidecar. Pairs are
  /// packed into the recorded chain entries in order.
  static HashMemMap import(const DramGeometry& geometry, const HashConfig& hash,
                           std::span<const KvPair> pairs, const Bookkeeping& books,
                           std::uint64_t page_limit = 0, std::uint32_t sliced_key_bits = 0);

 private:
  struct Location {
    std::size_t entry = 0;
    std::uint32_t slot = 0;
  };
  std::optional<Location> locate(const PageChain& chain, Key key) const;

  DramGeometry geometry_;
  HashConfig hash_;
  PageAllocator allocator_;
  PageStore store_;
  Bookkeeping books_;
  std::uint64_t live_ = 0;
};

}  // namespace hashmem
