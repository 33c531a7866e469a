#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hashmem/config.hpp"
#include "hashmem/hashmem_map.hpp"
#include "hashmem/hopscotch.hpp"
#include "hashmem/rlu.hpp"

namespace hashmem {

enum class BackendKind { PimArea, PimPerf, ConventionalSim, SoftChained, SoftTree, SoftHopscotch };

inline constexpr BackendKind kAllBackends[] = {
    BackendKind::PimArea,     BackendKind::PimPerf,  BackendKind::ConventionalSim,
    BackendKind::SoftChained, BackendKind::SoftTree, BackendKind::SoftHopscotch};

/// CLI spelling: pim-area, pim-perf, conventional, chained, tree, hopscotch.
std::string_view backend_name(BackendKind kind);
/// Throws UsageError on an unknown name.
BackendKind parse_backend(std::string_view name);
/// Simulated backends report model nanoseconds; the rest report wall-clock.
bool is_simulated(BackendKind kind);

/// CPU traversal of a bucket held in conventional DRAM: a row conflict, the
/// whole bucket streamed over the bus, and a per-line scan cost.
double conventional_probe_cost(std::uint64_t bucket_bytes, const DramTiming& timing,
                               double cpu_scan_ns_per_line);
/// Bytes a conventional traversal moves for a bucket: whole 64-byte lines.
std::uint64_t conventional_bus_bytes(std::uint64_t bucket_bytes);

// ---------------------------------------------------------------------------
// Operation logs
// ---------------------------------------------------------------------------

enum class OpKind { Insert, Probe, Delete };

struct Op {
  OpKind kind = OpKind::Probe;
  Key key = 0;
  Value value = 0;
};

enum class OpStatus { Inserted, Updated, AllocationFailure, Found, NotFound, Deleted };

std::string_view to_string(OpStatus status);

struct OpResult {
  OpStatus status = OpStatus::NotFound;
  Value value = 0;  ///< meaningful only for Found

  friend bool operator==(const OpResult&, const OpResult&) = default;
};

/// Random insert/probe/delete mix over a pool of `key_pool` distinct keys.
/// Roughly 50% inserts, 30% probes, 20% deletes.
std::vector<Op> generate_op_log(std::size_t n_ops, std::size_t key_pool, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

struct ProbeBatch {
  std::vector<ProbeOutcome> outcomes;
  double makespan_ns = 0.0;
};

class Backend {
 public:
  virtual ~Backend() = default;

  virtual BackendKind kind() const = 0;
  virtual OpResult insert(Key key, Value value) = 0;
  virtual OpResult erase(Key key) = 0;
  /// latency_ns is model time for simulated backends and 0 otherwise.
  virtual ProbeOutcome probe(Key key) = 0;

  /// Probes every key in order. Simulated backends schedule the page commands
  /// under `policy` and hand every executed command to `on_command`.
  virtual ProbeBatch probe_batch(std::span<const Key> keys, ParallelismPolicy policy,
                                 const std::function<void(const ProbeResult&)>& on_command = {});

  virtual std::optional<RluStats> stats() const { return std::nullopt; }

  OpResult apply(const Op& op);
  std::string_view name() const { return backend_name(kind()); }
};

struct BackendOptions {
  SimConfig sim;
  HashConfig hash;                 ///< bucket_count used by the simulated backends
  std::uint64_t page_limit = 0;    ///< 0 = every page in the geometry
  bool cam_mode = false;
  std::uint64_t expected_pairs = 1024;  ///< sizes the software tables
  std::uint32_t hopscotch_neighborhood = HopscotchTable::kDefaultNeighborhood;
};

std::unique_ptr<Backend> make_backend(BackendKind kind, const BackendOptions& options);

/// HashMem map driven through a rank-level unit (area- or performance-optimized PE).
class PimBackend final : public Backend {
 public:
  PimBackend(BackendKind kind, const BackendOptions& options);

  BackendKind kind() const override { return kind_; }
  OpResult insert(Key key, Value value) override;
  OpResult erase(Key key) override;
  ProbeOutcome probe(Key key) override;
  ProbeBatch probe_batch(std::span<const Key> keys, ParallelismPolicy policy,
                         const std::function<void(const ProbeResult&)>& on_command) override;
  std::optional<RluStats> stats() const override { return rlu_.stats(); }

  HashMemMap& map() { return map_; }
  const Rlu& rlu() const { return rlu_; }

 private:
  BackendKind kind_;
  HashMemMap map_;
  Rlu rlu_;
};

/// Same bucket layout as the PIM backends, but every probed page crosses the bus.
class ConventionalBackend final : public Backend {
 public:
  explicit ConventionalBackend(const BackendOptions& options);

  BackendKind kind() const override { return BackendKind::ConventionalSim; }
  OpResult insert(Key key, Value value) override;
  OpResult erase(Key key) override;
  ProbeOutcome probe(Key key) override;
  std::optional<RluStats> stats() const override { return stats_; }

  const HashMemMap& map() const { return map_; }

 private:
  HashMemMap map_;
  DramTiming timing_;
  double cpu_scan_ns_per_line_;
  RluStats stats_;
};

/// Separate chaining with a fixed bucket count; never rehashes.
class ChainedMap {
 public:
  explicit ChainedMap(std::size_t bucket_count);

  bool insert_or_assign(Key key, Value value);  ///< true if newly inserted
  std::optional<Value> find(Key key) const;
  bool erase(Key key);
  std::size_t size() const { return size_; }
  std::size_t bucket_count() const { return buckets_.size(); }

 private:
  std::size_t bucket_of(Key key) const;

  std::vector<std::vector<KvPair>> buckets_;
  std::size_t size_ = 0;
};

class ChainedBackend final : public Backend {
 public:
  explicit ChainedBackend(std::size_t bucket_count) : map_(bucket_count) {}
  BackendKind kind() const override { return BackendKind::SoftChained; }
  OpResult insert(Key key, Value value) override;
  OpResult erase(Key key) override;
  ProbeOutcome probe(Key key) override;

 private:
  ChainedMap map_;
};

/// Ordered red-black tree (std::map).
class TreeBackend final : public Backend {
 public:
  BackendKind kind() const override { return BackendKind::SoftTree; }
  OpResult insert(Key key, Value value) override;
  OpResult erase(Key key) override;
  ProbeOutcome probe(Key key) override;

 private:
  std::map<Key, Value> map_;
};

/// Hopscotch table that doubles and rehashes when an insert cannot be placed.
class HopscotchBackend final : public Backend {
 public:
  HopscotchBackend(std::size_t capacity, std::uint32_t neighborhood);
  BackendKind kind() const override { return BackendKind::SoftHopscotch; }
  OpResult insert(Key key, Value value) override;
  OpResult erase(Key key) override;
  ProbeOutcome probe(Key key) override;

  const HopscotchTable& table() const { return table_; }

 private:
  HopscotchTable table_;
};

// ---------------------------------------------------------------------------
// Cross-backend equivalence
// ---------------------------------------------------------------------------

struct Divergence {
  std::size_t op_index = 0;
  std::string backend;
  OpResult expected;
  OpResult actual;
};

struct EquivalenceReport {
  std::size_t ops_replayed = 0;
  std::optional<Divergence> divergence;

  bool agree() const { return !divergence.has_value(); }
};

/// Replays `log` on every backend in lock step against a fresh chained-map
/// oracle and reports the earliest disagreement.
EquivalenceReport equivalence_check(std::span<const Op> log,
                                    std::span<const std::unique_ptr<Backend>> backends);

}  // namespace hashmem
