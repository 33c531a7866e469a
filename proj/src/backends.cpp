#include "hashmem/backends.hpp"

#include <algorithm>
#include <bit>
#include <random>
#include <unordered_set>

#include "hashmem/errors.hpp"
#include "random_util.hpp"

namespace hashmem {

std::string_view backend_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::PimArea:
      return "pim-area";
    case BackendKind::PimPerf:
      return "pim-perf";
    case BackendKind::ConventionalSim:
      return "conventional";
    case BackendKind::SoftChained:
      return "chained";
    case BackendKind::SoftTree:
      return "tree";
    case BackendKind::SoftHopscotch:
      return "hopscotch";
  }
  return "?";
}

BackendKind parse_backend(std::string_view name) {
  for (BackendKind k : kAllBackends) {
    if (backend_name(k) == name) return k;
  }
  throw UsageError("unknown backend `" + std::string(name) + "`");
}

bool is_simulated(BackendKind kind) {
  return kind == BackendKind::PimArea || kind == BackendKind::PimPerf ||
         kind == BackendKind::ConventionalSim;
}

std::uint64_t conventional_bus_bytes(std::uint64_t bucket_bytes) {
  return (bucket_bytes + 63) / 64 * 64;
}

double conventional_probe_cost(std::uint64_t bucket_bytes, const DramTiming& timing,
                               double cpu_scan_ns_per_line) {
  const double activation = (timing.trp_cycles + timing.trcd_cycles) * timing.tck_ns;
  const auto lines = static_cast<double>((bucket_bytes + 63) / 64);
  return activation + column_access(bucket_bytes, timing) + cpu_scan_ns_per_line * lines;
}

std::string_view to_string(OpStatus status) {
  switch (status) {
    case OpStatus::Inserted:
      return "inserted";
    case OpStatus::Updated:
      return "updated";
    case OpStatus::AllocationFailure:
      return "allocation-failure";
    case OpStatus::Found:
      return "found";
    case OpStatus::NotFound:
      return "not-found";
    case OpStatus::Deleted:
      return "deleted";
  }
  return "?";
}

std::vector<Op> generate_op_log(std::size_t n_ops, std::size_t key_pool, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Key> pool;
  std::unordered_set<Key> seen;
  pool.reserve(key_pool);
  while (pool.size() < key_pool) {
    const Key k = detail::random_key(rng);
    if (seen.insert(k).second) pool.push_back(k);
  }
  std::vector<Op> log;
  log.reserve(n_ops);
  for (std::size_t i = 0; i < n_ops; ++i) {
    const auto roll = detail::uniform_below(rng, 10);
    Op op;
    op.kind = roll < 5 ? OpKind::Insert : roll < 8 ? OpKind::Probe : OpKind::Delete;
    op.key = pool.empty() ? 0 : pool[detail::uniform_below(rng, pool.size())];
    op.value = static_cast<Value>(rng());
    log.push_back(op);
  }
  return log;
}

// ---------------------------------------------------------------------------

OpResult Backend::apply(const Op& op) {
  switch (op.kind) {
    case OpKind::Insert:
      return insert(op.key, op.value);
    case OpKind::Delete:
      return erase(op.key);
    case OpKind::Probe: {
      const ProbeOutcome p = probe(op.key);
      return p.found() ? OpResult{OpStatus::Found, p.value} : OpResult{OpStatus::NotFound, 0};
    }
  }
  return {};
}

ProbeBatch Backend::probe_batch(std::span<const Key> keys, ParallelismPolicy,
                                const std::function<void(const ProbeResult&)>&) {
  ProbeBatch batch;
  batch.outcomes.reserve(keys.size());
  for (Key k : keys) {
    batch.outcomes.push_back(probe(k));
    batch.makespan_ns += batch.outcomes.back().latency_ns;
  }
  return batch;
}

namespace {

OpResult from_insert(InsertStatus s) {
  switch (s) {
    case InsertStatus::Inserted:
      return {OpStatus::Inserted, 0};
    case InsertStatus::Updated:
      return {OpStatus::Updated, 0};
    case InsertStatus::AllocationFailure:
      return {OpStatus::AllocationFailure, 0};
  }
  return {};
}

OpResult from_delete(DeleteStatus s) {
  return {s == DeleteStatus::Deleted ? OpStatus::Deleted : OpStatus::NotFound, 0};
}

PeConfig pe_config_for(BackendKind kind, const BackendOptions& o) {
  PeConfig pe;
  pe.variant = kind == BackendKind::PimPerf ? PeVariant::PerfOptimized : PeVariant::AreaOptimized;
  pe.key_bits = o.sim.key_bits;
  pe.value_bits = o.sim.value_bits;
  pe.include_value_readout_ticks = o.sim.include_value_readout_ticks;
  pe.cam_mode = kind == BackendKind::PimPerf && o.cam_mode;
  return pe;
}

}  // namespace

// ---------------------------------------------------------------------------

PimBackend::PimBackend(BackendKind kind, const BackendOptions& options)
    : kind_(kind),
      map_(options.sim.geometry, options.hash, options.page_limit,
           kind == BackendKind::PimPerf ? options.sim.key_bits : 0),
      rlu_(options.sim.geometry, options.sim.timing, options.sim.page_policy,
           pe_config_for(kind, options)) {
  if (kind != BackendKind::PimArea && kind != BackendKind::PimPerf) {
    throw UsageError("PimBackend needs pim-area or pim-perf");
  }
}

OpResult PimBackend::insert(Key key, Value value) { return from_insert(map_.insert(key, value)); }

OpResult PimBackend::erase(Key key) { return from_delete(map_.erase(key)); }

ProbeOutcome PimBackend::probe(Key key) { return map_.probe(key, rlu_); }

ProbeBatch PimBackend::probe_batch(std::span<const Key> keys, ParallelismPolicy policy,
                                   const std::function<void(const ProbeResult&)>& on_command) {
  ProbeBatch batch;
  batch.outcomes.reserve(keys.size());
  const double origin = rlu_.begin_batch();
  std::vector<ProbeResult> results;
  for (Key k : keys) {
    results.clear();
    batch.outcomes.push_back(map_.probe(k, rlu_, policy, origin, on_command ? &results : nullptr));
    if (on_command) {
      for (const auto& r : results) on_command(r);
    }
  }
  batch.makespan_ns = rlu_.now() - origin;
  return batch;
}

// ---------------------------------------------------------------------------

ConventionalBackend::ConventionalBackend(const BackendOptions& options)
    : map_(options.sim.geometry, options.hash, options.page_limit),
      timing_(options.sim.timing),
      cpu_scan_ns_per_line_(options.sim.cpu_scan_ns_per_line) {}

OpResult ConventionalBackend::insert(Key key, Value value) {
  return from_insert(map_.insert(key, value));
}

OpResult ConventionalBackend::erase(Key key) { return from_delete(map_.erase(key)); }

ProbeOutcome ConventionalBackend::probe(Key key) {
  ProbeOutcome out;
  const PageChain* chain = map_.chain(map_.bucket_of(key));
  if (!chain) return out;
  for (const ChainEntry& e : chain->entries) {
    const std::uint64_t bucket_bytes = std::uint64_t{e.fill} * 8;
    out.latency_ns += conventional_probe_cost(bucket_bytes, timing_, cpu_scan_ns_per_line_);
    ++out.commands;
    ++stats_.probes;
    ++stats_.activations;
    ++stats_.row_conflicts;
    stats_.bytes_on_bus += conventional_bus_bytes(bucket_bytes);

    const auto slots = map_.store().row(e.page_id).slots();
    for (std::uint32_t s = e.start; s < e.start + e.fill; ++s) {
      if (slots[s].state == SlotState::Occupied && slots[s].key == key) {
        out.status = ProbeStatus::Found;
        out.value = slots[s].value;
        return out;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

ChainedMap::ChainedMap(std::size_t bucket_count) : buckets_(std::max<std::size_t>(1, bucket_count)) {}

std::size_t ChainedMap::bucket_of(Key key) const {
  // Knuth multiplicative hash, independent of the HashMem bucket function.
  return static_cast<std::size_t>((std::uint64_t{key} * 2654435761ull) % buckets_.size());
}

bool ChainedMap::insert_or_assign(Key key, Value value) {
  auto& bucket = buckets_[bucket_of(key)];
  for (auto& kv : bucket) {
    if (kv.key == key) {
      kv.value = value;
      return false;
    }
  }
  bucket.push_back({key, value});
  ++size_;
  return true;
}

std::optional<Value> ChainedMap::find(Key key) const {
  for (const auto& kv : buckets_[bucket_of(key)]) {
    if (kv.key == key) return kv.value;
  }
  return std::nullopt;
}

bool ChainedMap::erase(Key key) {
  auto& bucket = buckets_[bucket_of(key)];
  for (auto it = bucket.begin(); it != bucket.end(); ++it) {
    if (it->key == key) {
      *it = bucket.back();
      bucket.pop_back();
      --size_;
      return true;
    }
  }
  return false;
}

OpResult ChainedBackend::insert(Key key, Value value) {
  require_legal_key(key);
  return {map_.insert_or_assign(key, value) ? OpStatus::Inserted : OpStatus::Updated, 0};
}

OpResult ChainedBackend::erase(Key key) {
  require_legal_key(key);
  return {map_.erase(key) ? OpStatus::Deleted : OpStatus::NotFound, 0};
}

ProbeOutcome ChainedBackend::probe(Key key) {
  require_legal_key(key);
  ProbeOutcome out;
  if (auto v = map_.find(key)) {
    out.status = ProbeStatus::Found;
    out.value = *v;
  }
  return out;
}

OpResult TreeBackend::insert(Key key, Value value) {
  require_legal_key(key);
  return {map_.insert_or_assign(key, value).second ? OpStatus::Inserted : OpStatus::Updated, 0};
}

OpResult TreeBackend::erase(Key key) {
  require_legal_key(key);
  return {map_.erase(key) ? OpStatus::Deleted : OpStatus::NotFound, 0};
}

ProbeOutcome TreeBackend::probe(Key key) {
  require_legal_key(key);
  ProbeOutcome out;
  if (auto it = map_.find(key); it != map_.end()) {
    out.status = ProbeStatus::Found;
    out.value = it->second;
  }
  return out;
}

HopscotchBackend::HopscotchBackend(std::size_t capacity, std::uint32_t neighborhood)
    : table_(capacity, neighborhood) {}

OpResult HopscotchBackend::insert(Key key, Value value) {
  require_legal_key(key);
  while (true) {
    switch (table_.insert(key, value)) {
      case HopscotchStatus::Inserted:
        return {OpStatus::Inserted, 0};
      case HopscotchStatus::Updated:
        return {OpStatus::Updated, 0};
      case HopscotchStatus::TableFull:
        table_ = table_.grown();
        break;
    }
  }
}

OpResult HopscotchBackend::erase(Key key) {
  require_legal_key(key);
  return {table_.remove(key) ? OpStatus::Deleted : OpStatus::NotFound, 0};
}

ProbeOutcome HopscotchBackend::probe(Key key) {
  require_legal_key(key);
  ProbeOutcome out;
  if (auto v = table_.lookup(key)) {
    out.status = ProbeStatus::Found;
    out.value = *v;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::unique_ptr<Backend> make_backend(BackendKind kind, const BackendOptions& o) {
  switch (kind) {
    case BackendKind::PimArea:
    case BackendKind::PimPerf:
      return std::make_unique<PimBackend>(kind, o);
    case BackendKind::ConventionalSim:
      return std::make_unique<ConventionalBackend>(o);
    case BackendKind::SoftChained:
      return std::make_unique<ChainedBackend>(std::max<std::uint64_t>(1, o.expected_pairs));
    case BackendKind::SoftTree:
      return std::make_unique<TreeBackend>();
    case BackendKind::SoftHopscotch: {
      // Start at <= 70% load for the expected size.
      const auto cap = std::bit_ceil(std::max<std::uint64_t>(64, o.expected_pairs * 10 / 7 + 1));
      return std::make_unique<HopscotchBackend>(cap, o.hopscotch_neighborhood);
    }
  }
  throw UsageError("unknown backend kind");
}

EquivalenceReport equivalence_check(std::span<const Op> log,
                                    std::span<const std::unique_ptr<Backend>> backends) {
  EquivalenceReport report;
  ChainedBackend oracle(std::max<std::size_t>(16, log.size() / 4));
  for (std::size_t i = 0; i < log.size(); ++i) {
    const OpResult expected = oracle.apply(log[i]);
    for (const auto& b : backends) {
      const OpResult actual = b->apply(log[i]);
      if (actual != expected) {
        report.ops_replayed = i + 1;
        report.divergence = Divergence{i, std::string(b->name()), expected, actual};
        return report;
      }
    }
  }
  report.ops_replayed = log.size();
  return report;
}

}  // namespace hashmem
