#include "hashmem/rlu.hpp"

#include <algorithm>
#include <string>

#include "hashmem/errors.hpp"

namespace hashmem {

CacheLine pad_to_cache_line(std::optional<Value> value) {
  CacheLine line{};
  if (value) {
    for (int i = 0; i < 4; ++i) line[i] = static_cast<std::uint8_t>(*value >> (8 * i));
  }
  return line;
}

Rlu::Rlu(const DramGeometry& geometry, const DramTiming& timing, PagePolicy policy, PeConfig pe)
    : geometry_(geometry), timing_(timing), policy_(policy), pe_(pe) {
  geometry_.validate();
  timing_.validate();
  pe_.validate();
  subarrays_.resize(geometry_.total_subarrays());
  last_act_ns_.assign(geometry_.total_subarrays(), 0.0);
  bank_free_ns_.assign(geometry_.total_banks(), 0.0);
}

const SubarrayState& Rlu::subarray_state(const RowAddress& addr) const {
  return subarrays_.at(subarray_index(addr, geometry_));
}

ProbeResult Rlu::run_at(const ProbeCommand& cmd, const PageStore& store, double start_ns) {
  const RowAddress addr = map_page_to_row(cmd.page_id, geometry_);
  if (cmd.start > cmd.end || cmd.end > geometry_.page_capacity()) {
    throw RangeError("probe range [" + std::to_string(cmd.start) + "," + std::to_string(cmd.end) +
                     ") outside page capacity");
  }
  const std::size_t sa = subarray_index(addr, geometry_);
  SubarrayState& state = subarrays_[sa];

  ProbeResult r;
  r.start_ns = start_ns;
  r.trace.reserve(5);

  double t = start_ns;
  switch (classify_access(addr, state)) {
    case RowOutcome::Hit:
      ++stats_.row_hits;
      break;
    case RowOutcome::Conflict: {
      ++stats_.row_conflicts;
      const RowAddress open{addr.channel, addr.rank, addr.bank, addr.subarray, *state.open_row};
      t = std::max(t, last_act_ns_[sa] + timing_.tras_ns());
      r.trace.push_back({t, EventKind::Pre, open});
      t += timing_.trp_ns();
      [[fallthrough]];
    }
    case RowOutcome::Idle:
      ++stats_.activations;
      r.trace.push_back({t, EventKind::Act, addr});
      last_act_ns_[sa] = t;
      t += timing_.trcd_ns();
      break;
  }
  state.open_row = addr.row;

  MatchResult m;
  if (pe_.variant == PeVariant::AreaOptimized) {
    m = area_scan(store.row(cmd.page_id), cmd.key, cmd.start, cmd.end);
  } else {
    m = perf_scan(store.sliced(cmd.page_id), cmd.key, pe_, cmd.start, cmd.end);
  }
  r.trace.push_back({t, EventKind::Pe, addr});
  t += static_cast<double>(m.pe_ticks) * timing_.pe_tick_ns;

  r.trace.push_back({t, EventKind::Read, addr});
  t += column_access(kCacheLineBytes, timing_);

  if (policy_ == PagePolicy::Closed) {
    t = std::max(t, last_act_ns_[sa] + timing_.tras_ns());
    r.trace.push_back({t, EventKind::Pre, addr});
    t += timing_.trp_ns();
    state.open_row.reset();
  }

  r.status = m.found ? ProbeStatus::Found : ProbeStatus::NotFound;
  r.value = m.found ? m.value : 0;
  r.cache_line = pad_to_cache_line(m.found ? std::optional<Value>(m.value) : std::nullopt);
  r.pe_ticks = m.pe_ticks;
  r.latency_ns = t - start_ns;

  ++stats_.probes;
  stats_.pe_ticks_total += m.pe_ticks;
  stats_.bytes_on_bus += kCacheLineBytes;
  return r;
}

double Rlu::begin_batch() {
  serial_clock_ns_ = timeline_end_;
  std::fill(bank_free_ns_.begin(), bank_free_ns_.end(), timeline_end_);
  return timeline_end_;
}

ProbeResult Rlu::issue(const ProbeCommand& cmd, const PageStore& store, ParallelismPolicy policy,
                       double not_before) {
  const RowAddress addr = map_page_to_row(cmd.page_id, geometry_);
  double& bank_free = bank_free_ns_[bank_index(addr, geometry_)];
  const double start = policy == ParallelismPolicy::Serial
                           ? std::max(serial_clock_ns_, not_before)
                           : std::max(bank_free, not_before);
  ProbeResult r = run_at(cmd, store, start);
  bank_free = std::max(bank_free, r.end_ns());
  if (policy == ParallelismPolicy::Serial) serial_clock_ns_ = r.end_ns();
  timeline_end_ = std::max(timeline_end_, r.end_ns());
  return r;
}

ProbeResult Rlu::execute_probe(const ProbeCommand& cmd, const PageStore& store) {
  const double origin = begin_batch();
  return issue(cmd, store, ParallelismPolicy::Serial, origin);
}

BatchResult Rlu::execute_batch(std::span<const ProbeCommand> cmds, const PageStore& store,
                               ParallelismPolicy policy) {
  BatchResult out;
  const double origin = begin_batch();
  out.results.reserve(cmds.size());
  for (const auto& cmd : cmds) out.results.push_back(issue(cmd, store, policy, origin));
  out.makespan_ns = timeline_end_ - origin;
  return out;
}

}  // namespace hashmem
