#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hashmem/dram.hpp"
#include "hashmem/page_store.hpp"
#include "hashmem/pe.hpp"

namespace hashmem {

inline constexpr std::size_t kCacheLineBytes = 64;
using CacheLine = std::array<std::uint8_t, kCacheLineBytes>;

/// Found: value little-endian in bytes [0,4), zeros elsewhere. Absent: all zeros.
CacheLine pad_to_cache_line(std::optional<Value> value);

/// One page-level lookup handed to the rank-level unit.
struct ProbeCommand {
  Key key = 0;
  PageId page_id = 0;
  std::uint32_t start = 0;  ///< first slot of the bucket's range in the page
  std::uint32_t end = 0;    ///< one past the last slot
};

enum class ProbeStatus { Found, NotFound };

struct ProbeResult {
  ProbeStatus status = ProbeStatus::NotFound;
  Value value = 0;
  CacheLine cache_line{};
  double start_ns = 0.0;
  double latency_ns = 0.0;
  std::uint64_t pe_ticks = 0;
  std::vector<TraceEvent> trace;

  bool found() const { return status == ProbeStatus::Found; }
  double end_ns() const { return start_ns + latency_ns; }
};

struct RluStats {
  std::uint64_t probes = 0;
  std::uint64_t activations = 0;
  std::uint64_t row_hits = 0;
  std::uint64_t row_conflicts = 0;
  std::uint64_t pe_ticks_total = 0;
  std::uint64_t bytes_on_bus = 0;
};

enum class ParallelismPolicy { Serial, BankParallel };

struct BatchResult {
  std::vector<ProbeResult> results;
  double makespan_ns = 0.0;
};

/// Rank-level unit: turns probe commands into ACT / PE / READ / PRE sequences
/// against per-subarray row-buffer state and keeps a global timeline.
///
/// Per command: optional PRE+ACT (or ACT alone, or nothing on a row hit), the
/// PE scan, one 64-byte READ of the output register, and a closing PRE under
/// the closed-page policy. A PRE never issues before tRAS has elapsed since
/// its ACT; with the default timings that wait is always zero.
class Rlu {
 public:
  Rlu(const DramGeometry& geometry, const DramTiming& timing, PagePolicy policy, PeConfig pe);

  /// Issues `cmd` at the end of the current timeline.
  ProbeResult execute_probe(const ProbeCommand& cmd, const PageStore& store);

  /// Runs every command starting from a common origin. Serial: one at a time.
  /// BankParallel: commands to distinct banks overlap; same-bank commands keep
  /// their order. Per-command results do not depend on the policy.
  BatchResult execute_batch(std::span<const ProbeCommand> cmds, const PageStore& store,
                            ParallelismPolicy policy);

  /// Lower-level scheduling used for dependent command chains: marks a batch
  /// origin, then issues commands no earlier than `not_before`.
  double begin_batch();
  ProbeResult issue(const ProbeCommand& cmd, const PageStore& store, ParallelismPolicy policy,
                    double not_before);
  /// Latest completion time on the timeline.
  double now() const { return timeline_end_; }

  const RluStats& stats() const { return stats_; }
  const PeConfig& pe_config() const { return pe_; }
  const DramGeometry& geometry() const { return geometry_; }
  const DramTiming& timing() const { return timing_; }
  PagePolicy page_policy() const { return policy_; }
  const SubarrayState& subarray_state(const RowAddress& addr) const;

 private:
  ProbeResult run_at(const ProbeCommand& cmd, const PageStore& store, double start_ns);

  DramGeometry geometry_;
  DramTiming timing_;
  PagePolicy policy_;
  PeConfig pe_;
  std::vector<SubarrayState> subarrays_;
  std::vector<double> last_act_ns_;
  std::vector<double> bank_free_ns_;
  double serial_clock_ns_ = 0.0;
  double timeline_end_ = 0.0;
  RluStats stats_;
};

}  // namespace hashmem
