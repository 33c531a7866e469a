#include "hashmem/hashmem_map.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "hashmem/errors.hpp"

namespace hashmem {

void HashConfig::validate() const {
  if (bucket_count == 0) throw ConfigError("bucket_count must be >= 1");
  if ((multiplier & 1u) == 0) throw ConfigError("hash multiplier must be odd");
}

BucketId hash_key(Key key, const HashConfig& config) {
  require_legal_key(key);
  const std::uint64_t mixed = (std::uint64_t{key} * config.multiplier) ^ config.seed;
  return (mixed >> 32) % config.bucket_count;
}

std::uint64_t default_bucket_count(std::uint64_t n_pairs, std::uint32_t page_capacity) {
  const std::uint64_t half = std::max<std::uint64_t>(1, page_capacity / 2);
  return std::max<std::uint64_t>(1, (n_pairs + half - 1) / half);
}

// ---------------------------------------------------------------------------

std::optional<PageId> PageAllocator::allocate() {
  if (!released_.empty()) {
    const PageId id = *released_.begin();
    released_.erase(released_.begin());
    ++allocated_;
    return id;
  }
  if (next_fresh_ >= limit_) return std::nullopt;
  ++allocated_;
  return next_fresh_++;
}

void PageAllocator::release(PageId id) {
  if (id >= next_fresh_ || released_.contains(id)) {
    throw RangeError("page " + std::to_string(id) + " is not allocated");
  }
  released_.insert(id);
  --allocated_;
}

// ---------------------------------------------------------------------------

const PageChain* Bookkeeping::find(BucketId bucket) const {
  auto it = chains_.find(bucket);
  return it == chains_.end() ? nullptr : &it->second;
}

void Bookkeeping::write_sidecar(std::ostream& out) const {
  for (const auto& [bucket, chain] : chains_) {
    out << bucket << ':';
    for (const auto& e : chain.entries) {
      out << ' ' << e.page_id << '[' << e.start << ',' << e.end << ')';
    }
    out << '\n';
  }
}

Bookkeeping Bookkeeping::read_sidecar(std::istream& in) {
  Bookkeeping books;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&] { throw IoError("sidecar line " + std::to_string(line_no) + " is malformed"); };
    std::istringstream ls(line);
    BucketId bucket = 0;
    char colon = 0;
    if (!(ls >> bucket >> colon) || colon != ':') fail();
    PageChain& chain = books.chains_[bucket];
    PageId page = 0;
    while (ls >> page) {
      char open = 0, comma = 0, close = 0;
      std::uint32_t start = 0, end = 0;
      if (!(ls >> open >> start >> comma >> end >> close) || open != '[' || comma != ',' ||
          close != ')' || start >= end) {
        fail();
      }
      chain.entries.push_back({page, start, end, 0});
    }
    if (!ls.eof()) fail();
    if (chain.entries.empty()) fail();
  }
  return books;
}

// ---------------------------------------------------------------------------

HashMemMap::HashMemMap(const DramGeometry& geometry, const HashConfig& hash,
                       std::uint64_t page_limit, std::uint32_t sliced_key_bits)
    : geometry_(geometry),
      hash_(hash),
      allocator_(page_limit == 0 ? geometry.total_pages()
                                 : std::min(page_limit, geometry.total_pages())),
      store_(geometry.page_capacity(), sliced_key_bits) {
  geometry_.validate();
  hash_.validate();
}

std::optional<HashMemMap::Location> HashMemMap::locate(const PageChain& chain, Key key) const {
  for (std::size_t e = 0; e < chain.entries.size(); ++e) {
    const ChainEntry& entry = chain.entries[e];
    const auto slots = store_.row(entry.page_id).slots();
    for (std::uint32_t s = entry.start; s < entry.start + entry.fill; ++s) {
      if (slots[s].state == SlotState::Occupied && slots[s].key == key) return Location{e, s};
    }
  }
  return std::nullopt;
}

InsertStatus HashMemMap::insert(Key key, Value value) {
  const BucketId bucket = hash_key(key, hash_);
  const bool existed = books_.chains_.contains(bucket);
  PageChain& chain = books_.chains_[bucket];

  if (auto loc = locate(chain, key)) {
    store_.write_slot(chain.entries[loc->entry].page_id, loc->slot, Slot::occupied(key, value));
    return InsertStatus::Updated;
  }

  if (chain.tombstones > 0) {
    for (const ChainEntry& entry : chain.entries) {
      const auto slots = store_.row(entry.page_id).slots();
      for (std::uint32_t s = entry.start; s < entry.start + entry.fill; ++s) {
        if (slots[s].state == SlotState::Tombstone) {
          store_.write_slot(entry.page_id, s, Slot::occupied(key, value));
          --chain.tombstones;
          ++chain.live;
          ++live_;
          return InsertStatus::Inserted;
        }
      }
    }
  }

  if (chain.entries.empty() || chain.entries.back().full()) {
    const auto page = allocator_.allocate();
    if (!page) {
      if (!existed) books_.chains_.erase(bucket);
      return InsertStatus::AllocationFailure;
    }
    store_.create(*page);
    chain.entries.push_back({*page, 0, page_capacity(), 0});
  }

  ChainEntry& last = chain.entries.back();
  store_.write_slot(last.page_id, last.start + last.fill, Slot::occupied(key, value));
  ++last.fill;
  ++chain.live;
  ++live_;
  return InsertStatus::Inserted;
}

DeleteStatus HashMemMap::erase(Key key) {
  const BucketId bucket = hash_key(key, hash_);
  auto it = books_.chains_.find(bucket);
  if (it == books_.chains_.end()) return DeleteStatus::NotFound;
  PageChain& chain = it->second;
  auto loc = locate(chain, key);
  if (!loc) return DeleteStatus::NotFound;
  store_.write_slot(chain.entries[loc->entry].page_id, loc->slot, Slot::tombstone());
  --chain.live;
  ++chain.tombstones;
  --live_;
  return DeleteStatus::Deleted;
}

std::optional<Value> HashMemMap::find(Key key) const {
  const PageChain* chain = books_.find(hash_key(key, hash_));
  if (!chain) return std::nullopt;
  auto loc = locate(*chain, key);
  if (!loc) return std::nullopt;
  return store_.row(chain->entries[loc->entry].page_id)[loc->slot].value;
}

std::vector<ProbeCommand> HashMemMap::commands_for(Key key) const {
  std::vector<ProbeCommand> cmds;
  if (const PageChain* chain = books_.find(hash_key(key, hash_))) {
    for (const ChainEntry& e : chain->entries) cmds.push_back({key, e.page_id, e.start, e.end});
  }
  return cmds;
}

ProbeOutcome HashMemMap::probe(Key key, Rlu& rlu) const {
  const double origin = rlu.begin_batch();
  return probe(key, rlu, ParallelismPolicy::Serial, origin);
}

ProbeOutcome HashMemMap::probe(Key key, Rlu& rlu, ParallelismPolicy policy, double not_before,
                               std::vector<ProbeResult>* results) const {
  ProbeOutcome out;
  const PageChain* chain = books_.find(hash_key(key, hash_));
  if (!chain) return out;
  double t = not_before;
  for (const ChainEntry& e : chain->entries) {
    ProbeResult r = rlu.issue({key, e.page_id, e.start, e.end}, store_, policy, t);
    out.latency_ns += r.latency_ns;
    ++out.commands;
    t = r.end_ns();
    const bool hit = r.found();
    const Value v = r.value;
    if (results) results->push_back(std::move(r));
    if (hit) {
      out.status = ProbeStatus::Found;
      out.value = v;
      break;
    }
  }
  return out;
}

BucketHistogram HashMemMap::bucket_histogram() const {
  BucketHistogram h;
  h.lengths.assign(hash_.bucket_count, 0);
  for (const auto& [bucket, chain] : books_.chains()) h.lengths[bucket] = chain.live;
  if (h.lengths.empty()) return h;

  double sum = 0.0;
  for (auto n : h.lengths) {
    sum += static_cast<double>(n);
    h.max = std::max(h.max, n);
  }
  h.mean = sum / static_cast<double>(h.lengths.size());
  if (h.mean > 0.0) {
    double sq = 0.0;
    for (auto n : h.lengths) sq += (static_cast<double>(n) - h.mean) * (static_cast<double>(n) - h.mean);
    h.coefficient_of_variation = std::sqrt(sq / static_cast<double>(h.lengths.size())) / h.mean;
  }
  return h;
}

CoLocationReport HashMemMap::co_locate_buckets(std::uint32_t threshold) {
  CoLocationReport report;
  report.pages_before = allocator_.allocated();
  const std::uint32_t cap = page_capacity();

  struct Candidate {
    BucketId bucket;
    std::uint32_t length;
  };
  std::vector<Candidate> candidates;
  for (const auto& [bucket, chain] : books_.chains_) {
    if (chain.entries.size() != 1) continue;
    const ChainEntry& e = chain.entries.front();
    if (e.start != 0 || e.end != cap) continue;  // already shares a page
    if (chain.live == 0 || chain.live > threshold) continue;
    candidates.push_back({bucket, static_cast<std::uint32_t>(chain.live)});
  }
  report.candidates = candidates.size();
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.length > b.length; });

  struct Bin {
    std::uint32_t used = 0;
    std::vector<Candidate> members;
  };
  std::vector<Bin> bins;
  for (const Candidate& c : candidates) {
    auto fit = std::find_if(bins.begin(), bins.end(),
                            [&](const Bin& b) { return b.used + c.length <= cap; });
    if (fit == bins.end()) {
      bins.emplace_back();
      fit = std::prev(bins.end());
    }
    fit->used += c.length;
    fit->members.push_back(c);
  }

  for (const Bin& bin : bins) {
    if (bin.members.size() < 2) continue;
    const PageId target = books_.chains_.at(bin.members.front().bucket).entries.front().page_id;

    std::vector<std::vector<KvPair>> contents;
    for (const Candidate& c : bin.members) {
      const ChainEntry& e = books_.chains_.at(c.bucket).entries.front();
      const auto slots = store_.row(e.page_id).slots();
      std::vector<KvPair> pairs;
      for (std::uint32_t s = e.start; s < e.start + e.fill; ++s) {
        if (slots[s].state == SlotState::Occupied) pairs.push_back({slots[s].key, slots[s].value});
      }
      contents.push_back(std::move(pairs));
    }

    RowImage row(cap);
    std::uint32_t offset = 0;
    std::vector<BucketId> hosted;
    for (std::size_t m = 0; m < bin.members.size(); ++m) {
      PageChain& chain = books_.chains_.at(bin.members[m].bucket);
      const PageId old_page = chain.entries.front().page_id;
      const auto len = static_cast<std::uint32_t>(contents[m].size());
      for (std::uint32_t i = 0; i < len; ++i) {
        row[offset + i] = Slot::occupied(contents[m][i].key, contents[m][i].value);
      }
      chain.entries.front() = {target, offset, offset + len, len};
      chain.tombstones = 0;
      offset += len;
      hosted.push_back(bin.members[m].bucket);
      if (old_page != target) {
        store_.release(old_page);
        allocator_.release(old_page);
      }
      ++report.buckets_relocated;
    }
    store_.write_row(target, row);
    report.shared_pages.emplace_back(target, std::move(hosted));
  }

  report.pages_after = allocator_.allocated();
  return report;
}

std::uint64_t HashMemMap::used_slots() const {
  std::uint64_t n = 0;
  for (const auto& [bucket, chain] : books_.chains()) n += chain.live + chain.tombstones;
  return n;
}

std::vector<KvPair> HashMemMap::export_pairs() const {
  std::vector<KvPair> out;
  out.reserve(live_);
  for (const auto& [bucket, chain] : books_.chains()) {
    for (const ChainEntry& e : chain.entries) {
      const auto slots = store_.row(e.page_id).slots();
      for (std::uint32_t s = e.start; s < e.start + e.fill; ++s) {
        if (slots[s].state == SlotState::Occupied) out.push_back({slots[s].key, slots[s].value});
      }
    }
  }
  return out;
}

HashMemMap HashMemMap::import(const DramGeometry& geometry, const HashConfig& hash,
                              std::span<const KvPair> pairs, const Bookkeeping& books,
                              std::uint64_t page_limit, std::uint32_t sliced_key_bits) {
  HashMemMap map(geometry, hash, page_limit, sliced_key_bits);
  const std::uint32_t cap = map.page_capacity();

  // Claim every referenced page id in ascending order so the allocator's view
  // matches the recorded layout.
  std::set<PageId> referenced;
  for (const auto& [bucket, chain] : books.chains()) {
    if (bucket >= hash.bucket_count) throw IoError("sidecar bucket outside bucket_count");
    for (const auto& e : chain.entries) {
      if (e.end > cap) throw IoError("sidecar range exceeds page capacity");
      referenced.insert(e.page_id);
    }
  }
  std::set<PageId> skipped;
  for (PageId want : referenced) {
    while (true) {
      auto got = map.allocator_.allocate();
      if (!got) throw CapacityError("sidecar references more pages than available");
      if (*got == want) break;
      skipped.insert(*got);
    }
    map.store_.create(want);
  }
  for (PageId id : skipped) map.allocator_.release(id);

  map.books_ = books;
  for (auto& [bucket, chain] : map.books_.chains_) {
    for (auto& e : chain.entries) e.fill = 0;
    chain.live = 0;
    chain.tombstones = 0;
  }

  for (const KvPair& p : pairs) {
    const BucketId bucket = hash_key(p.key, hash);
    auto it = map.books_.chains_.find(bucket);
    if (it == map.books_.chains_.end()) {
      throw IoError("pair with key " + std::to_string(p.key) + " has no chain in the sidecar");
    }
    PageChain& chain = it->second;
    auto slot_entry = std::find_if(chain.entries.begin(), chain.entries.end(),
                                   [](const ChainEntry& e) { return !e.full(); });
    if (slot_entry == chain.entries.end()) {
      throw CapacityError("bucket " + std::to_string(bucket) + " overflows its recorded chain");
    }
    map.store_.write_slot(slot_entry->page_id, slot_entry->start + slot_entry->fill,
                          Slot::occupied(p.key, p.value));
    ++slot_entry->fill;
    ++chain.live;
    ++map.live_;
  }
  return map;
}

}  // namespace hashmem
