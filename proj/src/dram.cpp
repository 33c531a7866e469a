#include "hashmem/dram.hpp"

#include <cstdio>

#include "hashmem/errors.hpp"

namespace hashmem {

namespace {

// Timestamps are sums of multiples of tCK and the PE tick; allow for the
// rounding of non-dyadic configurations.
constexpr double kTimeEpsilon = 1e-6;

}  // namespace

void DramGeometry::validate() const {
  if (channels == 0 || ranks_per_channel == 0 || banks_per_rank == 0 || subarrays_per_bank == 0 ||
      rows_per_subarray == 0 || row_size_bytes == 0) {
    throw ConfigError("geometry counts must all be >= 1");
  }
  if (row_size_bytes % 8 != 0) {
    throw ConfigError("row_size_bytes must be a multiple of 8 (one key-value pair)");
  }
}

std::uint64_t DramGeometry::total_banks() const {
  return std::uint64_t{channels} * ranks_per_channel * banks_per_rank;
}

std::uint64_t DramGeometry::total_subarrays() const { return total_banks() * subarrays_per_bank; }

std::uint64_t DramGeometry::total_pages() const { return total_subarrays() * rows_per_subarray; }

void DramTiming::validate() const {
  if (!(tck_ns > 0.0) || !(pe_tick_ns > 0.0) || trcd_cycles == 0 || trp_cycles == 0 ||
      tcl_cycles == 0 || tras_cycles == 0 || burst_cycles_per_line == 0) {
    throw ConfigError("timing values must all be > 0");
  }
  if (tras_cycles < trcd_cycles) {
    throw ConfigError("tRAS must be >= tRCD");
  }
}

RowAddress map_page_to_row(PageId page_id, const DramGeometry& g) {
  if (page_id >= g.total_pages()) {
    throw RangeError("page id " + std::to_string(page_id) + " outside " +
                     std::to_string(g.total_pages()) + " pages");
  }
  RowAddress a;
  std::uint64_t rest = page_id;
  a.bank = static_cast<std::uint32_t>(rest % g.banks_per_rank);
  rest /= g.banks_per_rank;
  a.subarray = static_cast<std::uint32_t>(rest % g.subarrays_per_bank);
  rest /= g.subarrays_per_bank;
  a.row = static_cast<std::uint32_t>(rest % g.rows_per_subarray);
  rest /= g.rows_per_subarray;
  a.rank = static_cast<std::uint32_t>(rest % g.ranks_per_channel);
  rest /= g.ranks_per_channel;
  a.channel = static_cast<std::uint32_t>(rest);
  return a;
}

PageId row_to_page(const RowAddress& a, const DramGeometry& g) {
  if (a.channel >= g.channels || a.rank >= g.ranks_per_channel || a.bank >= g.banks_per_rank ||
      a.subarray >= g.subarrays_per_bank || a.row >= g.rows_per_subarray) {
    throw RangeError("row address outside geometry");
  }
  PageId p = a.channel;
  p = p * g.ranks_per_channel + a.rank;
  p = p * g.rows_per_subarray + a.row;
  p = p * g.subarrays_per_bank + a.subarray;
  p = p * g.banks_per_rank + a.bank;
  return p;
}

std::uint64_t bank_index(const RowAddress& a, const DramGeometry& g) {
  return (std::uint64_t{a.channel} * g.ranks_per_channel + a.rank) * g.banks_per_rank + a.bank;
}

std::uint64_t subarray_index(const RowAddress& a, const DramGeometry& g) {
  return bank_index(a, g) * g.subarrays_per_bank + a.subarray;
}

RowOutcome classify_access(const RowAddress& addr, const SubarrayState& state) {
  if (!state.open_row) return RowOutcome::Idle;
  return *state.open_row == addr.row ? RowOutcome::Hit : RowOutcome::Conflict;
}

double activate(const RowAddress& addr, SubarrayState& state, const DramTiming& timing) {
  const RowOutcome outcome = classify_access(addr, state);
  state.open_row = addr.row;
  switch (outcome) {
    case RowOutcome::Hit:
      return 0.0;
    case RowOutcome::Idle:
      return timing.trcd_cycles * timing.tck_ns;
    case RowOutcome::Conflict:
      return (timing.trp_cycles + timing.trcd_cycles) * timing.tck_ns;
  }
  return 0.0;
}

double column_access(std::uint64_t n_bytes, const DramTiming& timing) {
  if (n_bytes == 0) return 0.0;
  const std::uint64_t lines = (n_bytes + 63) / 64;
  return static_cast<double>(timing.tcl_cycles + lines * timing.burst_cycles_per_line) *
         timing.tck_ns;
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Act:
      return "ACT";
    case EventKind::Pe:
      return "PE";
    case EventKind::Read:
      return "READ";
    case EventKind::Pre:
      return "PRE";
  }
  return "?";
}

std::string trace_csv_header() { return "timestamp_ns,unit,event,bank,subarray,row"; }

std::string trace_csv_line(const TraceEvent& e) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.4f,ch%u.rk%u,%s,%u,%u,%u", e.timestamp_ns, e.addr.channel,
                e.addr.rank, to_string(e.kind), e.addr.bank, e.addr.subarray, e.addr.row);
  return buf;
}

ProtocolChecker::ProtocolChecker(const DramGeometry& geometry, const DramTiming& timing)
    : geometry_(geometry), timing_(timing), subarrays_(geometry.total_subarrays()) {}

void ProtocolChecker::flag(std::string reason) {
  ++violation_count_;
  if (violations_.size() < 16) {
    violations_.push_back({events_seen_, std::move(reason)});
  }
}

void ProtocolChecker::observe(const TraceEvent& e) {
  auto& sa = subarrays_.at(subarray_index(e.addr, geometry_));
  const double t = e.timestamp_ns;
  switch (e.kind) {
    case EventKind::Act:
      if (sa.open_row) {
        flag("ACT while row " + std::to_string(*sa.open_row) + " is open without precharge");
      }
      if (sa.last_pre_ns && t + kTimeEpsilon < *sa.last_pre_ns + timing_.trp_ns()) {
        flag("ACT before tRP elapsed since PRE");
      }
      sa.open_row = e.addr.row;
      sa.last_act_ns = t;
      break;
    case EventKind::Pe:
    case EventKind::Read:
      if (!sa.open_row || *sa.open_row != e.addr.row) {
        flag(std::string(to_string(e.kind)) + " on a row that is not open");
      } else if (t + kTimeEpsilon < sa.last_act_ns + timing_.trcd_ns()) {
        flag(std::string(to_string(e.kind)) + " before tRCD elapsed since ACT");
      }
      break;
    case EventKind::Pre:
      if (sa.open_row && t + kTimeEpsilon < sa.last_act_ns + timing_.tras_ns()) {
        flag("PRE before tRAS elapsed since ACT");
      }
      sa.open_row.reset();
      sa.last_pre_ns = t;
      break;
  }
  ++events_seen_;
}

void ProtocolChecker::observe(std::span<const TraceEvent> events) {
  for (const auto& e : events) observe(e);
}

}  // namespace hashmem
