#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hashmem {

using PageId = std::uint64_t;

/// Physical hierarchy of the simulated memory. One page == one subarray row.
struct DramGeometry {
  std::uint32_t channels = 1;
  std::uint32_t ranks_per_channel = 1;
  std::uint32_t banks_per_rank = 8;
  std::uint32_t subarrays_per_bank = 128;
  std::uint32_t rows_per_subarray = 512;
  std::uint32_t row_size_bytes = 8192;  ///< rank-wide row, 8 bytes per KV pair

  /// Throws ConfigError when a count is zero or the row is not a whole number of pairs.
  void validate() const;

  std::uint64_t total_pages() const;
  std::uint64_t total_subarrays() const;
  std::uint64_t total_banks() const;
  std::uint32_t page_capacity() const { return row_size_bytes / 8; }
};

/// Command timing. Cycle counts are in DRAM clocks of length tck_ns.
struct DramTiming {
  double tck_ns = 0.625;  ///< DDR4-3200
  std::uint32_t trcd_cycles = 22;
  std::uint32_t trp_cycles = 22;
  std::uint32_t tcl_cycles = 22;
  std::uint32_t tras_cycles = 52;           ///< 32 ns rounded up to whole clocks
  std::uint32_t burst_cycles_per_line = 4;  ///< BL8 on a 64-bit bus
  double pe_tick_ns = 2.5;                  ///< 400 MHz in-array logic

  void validate() const;

  double trcd_ns() const { return trcd_cycles * tck_ns; }
  double trp_ns() const { return trp_cycles * tck_ns; }
  double tras_ns() const { return tras_cycles * tck_ns; }
};

enum class PagePolicy { Closed, Open };

struct RowAddress {
  std::uint32_t channel = 0;
  std::uint32_t rank = 0;
  std::uint32_t bank = 0;
  std::uint32_t subarray = 0;
  std::uint32_t row = 0;

  friend bool operator==(const RowAddress&, const RowAddress&) = default;
};

/// Row-buffer state of a single subarray.
struct SubarrayState {
  std::optional<std::uint32_t> open_row;
};

/// Bank-interleaved mapping: bank varies fastest, then subarray, row, rank, channel.
RowAddress map_page_to_row(PageId page_id, const DramGeometry& geometry);
PageId row_to_page(const RowAddress& addr, const DramGeometry& geometry);

/// Dense index of the subarray that holds `addr`.
std::uint64_t subarray_index(const RowAddress& addr, const DramGeometry& geometry);
/// Dense index of the (channel, rank, bank) triple that holds `addr`.
std::uint64_t bank_index(const RowAddress& addr, const DramGeometry& geometry);

enum class RowOutcome { Hit, Idle, Conflict };

/// Classifies the access without touching state.
RowOutcome classify_access(const RowAddress& addr, const SubarrayState& state);

/// Opens addr.row in `state` and returns the time until columns are readable:
/// 0 on a row hit, tRCD on an idle subarray, tRP + tRCD on a conflict.
double activate(const RowAddress& addr, SubarrayState& state, const DramTiming& timing);

/// tCL plus one burst per started 64-byte line; zero bytes costs nothing.
double column_access(std::uint64_t n_bytes, const DramTiming& timing);

// ---------------------------------------------------------------------------
// Event traces and the protocol checker
// ---------------------------------------------------------------------------

enum class EventKind { Act, Pe, Read, Pre };

const char* to_string(EventKind kind);

struct TraceEvent {
  double timestamp_ns = 0.0;
  EventKind kind = EventKind::Act;
  RowAddress addr;
};

/// Header line plus one `timestamp_ns, unit, event, bank, subarray, row` row per event.
std::string trace_csv_header();
std::string trace_csv_line(const TraceEvent& event);

struct ProtocolViolation {
  std::size_t event_index = 0;
  std::string reason;
};

/// Incremental checker for the row-buffer protocol. Events for one subarray
/// must be observed in timestamp order; events from different subarrays may
/// interleave arbitrarily.
class ProtocolChecker {
 public:
  ProtocolChecker(const DramGeometry& geometry, const DramTiming& timing);

  void observe(const TraceEvent& event);
  void observe(std::span<const TraceEvent> events);

  std::size_t events_seen() const { return events_seen_; }
  std::size_t violation_count() const { return violation_count_; }
  /// First few violations, for diagnostics.
  const std::vector<ProtocolViolation>& violations() const { return violations_; }

 private:
  struct Bookkeeping {
    std::optional<std::uint32_t> open_row;
    double last_act_ns = 0.0;
    std::optional<double> last_pre_ns;
  };

  void flag(std::string reason);

  DramGeometry geometry_;
  DramTiming timing_;
  std::vector<Bookkeeping> subarrays_;
  std::size_t events_seen_ = 0;
  std::size_t violation_count_ = 0;
  std::vector<ProtocolViolation> violations_;
};

}  // namespace hashmem
