#include <doctest.h>

#include <algorithm>
#include <vector>

#include "hashmem/errors.hpp"
#include "hashmem/rlu.hpp"

using namespace hashmem;

namespace {

PeConfig area_pe() { return {}; }

PeConfig perf_pe() {
  PeConfig c;
  c.variant = PeVariant::PerfOptimized;
  return c;
}

struct Fixture {
  DramGeometry geometry;
  DramTiming timing;
  PageStore store{1024, 32};

  Fixture() {
    for (PageId p = 0; p < 32; ++p) {
      store.create(p);
      store.write_row(p, encode_row(std::vector<KvPair>{{static_cast<Key>(p + 1), static_cast<Value>(p * 10)}}, 1024));
    }
  }
};

// Closed-page latency written out from the component formulas.
double closed_page_latency(const DramTiming& t, std::uint64_t ticks) {
  const double act = t.trcd_cycles * t.tck_ns;
  const double pe = static_cast<double>(ticks) * t.pe_tick_ns;
  const double read = (t.tcl_cycles + t.burst_cycles_per_line) * t.tck_ns;
  const double pre = t.trp_cycles * t.tck_ns;
  return act + pe + read + pre;
}

}  // namespace

TEST_CASE("pad_to_cache_line") {
  CacheLine line = pad_to_cache_line(70);
  CHECK(line[0] == 0x46);
  CHECK(std::all_of(line.begin() + 1, line.end(), [](std::uint8_t b) { return b == 0; }));
  line = pad_to_cache_line(std::nullopt);
  CHECK(std::all_of(line.begin(), line.end(), [](std::uint8_t b) { return b == 0; }));
  line = pad_to_cache_line(0xFFFFFFFDu);
  CHECK(line[0] == 0xFD);
  CHECK(line[1] == 0xFF);
  CHECK(line[2] == 0xFF);
  CHECK(line[3] == 0xFF);
  CHECK(std::all_of(line.begin() + 4, line.end(), [](std::uint8_t b) { return b == 0; }));
}

TEST_CASE("area-optimized miss on an empty bucket") {
  Fixture f;
  f.store.create(100);
  Rlu rlu(f.geometry, f.timing, PagePolicy::Closed, area_pe());
  const ProbeResult r = rlu.execute_probe({42, 100, 0, 1024}, f.store);
  CHECK(!r.found());
  CHECK(r.pe_ticks == 1);
  CHECK(r.latency_ns == doctest::Approx(46.25));
  CHECK(r.latency_ns == doctest::Approx(closed_page_latency(f.timing, 1)));
  CHECK(r.trace.size() == 4);
}

TEST_CASE("performance-optimized probe costs 64 ticks") {
  Fixture f;
  Rlu rlu(f.geometry, f.timing, PagePolicy::Closed, perf_pe());
  const ProbeResult hit = rlu.execute_probe({4, 3, 0, 1024}, f.store);
  CHECK(hit.found());
  CHECK(hit.value == 30);
  CHECK(hit.cache_line[0] == 30);
  CHECK(hit.latency_ns == doctest::Approx(203.75));
  CHECK(hit.latency_ns == doctest::Approx(closed_page_latency(f.timing, 64)));
  const ProbeResult miss = rlu.execute_probe({999, 3, 0, 1024}, f.store);
  CHECK(!miss.found());
  CHECK(miss.latency_ns == doctest::Approx(203.75));
  CHECK(rlu.stats().bytes_on_bus == 128);
  CHECK(rlu.stats().probes == 2);
  CHECK(rlu.stats().activations == 2);
}

TEST_CASE("open-page row hit skips activation") {
  Fixture f;
  Rlu rlu(f.geometry, f.timing, PagePolicy::Open, perf_pe());
  const ProbeResult first = rlu.execute_probe({1, 0, 0, 1024}, f.store);
  const ProbeResult again = rlu.execute_probe({1, 0, 0, 1024}, f.store);
  const double readout = (f.timing.tcl_cycles + f.timing.burst_cycles_per_line) * f.timing.tck_ns;
  CHECK(first.latency_ns == doctest::Approx(f.timing.trcd_ns() + 64 * 2.5 + readout));
  CHECK(again.latency_ns == doctest::Approx(64 * 2.5 + readout));
  CHECK(rlu.stats().row_hits == 1);

  // Page 8 * 128 shares subarray 0 of bank 0 with page 0 but sits in row 1.
  f.store.create(8 * 128);
  const ProbeResult conflict = rlu.execute_probe({1, 8 * 128, 0, 1024}, f.store);
  CHECK(rlu.stats().row_conflicts == 1);
  CHECK(conflict.latency_ns >= f.timing.trp_ns() + f.timing.trcd_ns() + 64 * 2.5 + readout - 1e-9);
}

TEST_CASE("every trace passes the protocol checker") {
  Fixture f;
  for (PagePolicy policy : {PagePolicy::Closed, PagePolicy::Open}) {
    for (ParallelismPolicy par : {ParallelismPolicy::Serial, ParallelismPolicy::BankParallel}) {
      Rlu rlu(f.geometry, f.timing, policy, area_pe());
      std::vector<ProbeCommand> cmds;
      for (int i = 0; i < 200; ++i) cmds.push_back({static_cast<Key>(i % 40 + 1), static_cast<PageId>((i * 7) % 32), 0, 1024});
      const BatchResult b = rlu.execute_batch(cmds, f.store, par);
      ProtocolChecker checker(f.geometry, f.timing);
      std::vector<TraceEvent> events;
      for (const auto& r : b.results) events.insert(events.end(), r.trace.begin(), r.trace.end());
      std::stable_sort(events.begin(), events.end(),
                       [](const TraceEvent& a, const TraceEvent& b) { return a.timestamp_ns < b.timestamp_ns; });
      checker.observe(events);
      CHECK(checker.violation_count() == 0);
    }
  }
}

TEST_CASE("batch makespans") {
  Fixture f;
  SUBCASE("serial, same bank") {
    Rlu rlu(f.geometry, f.timing, PagePolicy::Closed, perf_pe());
    const std::vector<ProbeCommand> cmds{{1, 0, 0, 1024}, {9, 8, 0, 1024}};
    const BatchResult b = rlu.execute_batch(cmds, f.store, ParallelismPolicy::Serial);
    CHECK(b.makespan_ns == doctest::Approx(b.results[0].latency_ns + b.results[1].latency_ns));
  }
  SUBCASE("bank-parallel, different banks") {
    Rlu rlu(f.geometry, f.timing, PagePolicy::Closed, area_pe());
    const std::vector<ProbeCommand> cmds{{1, 0, 0, 1024}, {99, 1, 0, 1024}};
    const BatchResult b = rlu.execute_batch(cmds, f.store, ParallelismPolicy::BankParallel);
    CHECK(b.makespan_ns == doctest::Approx(std::max(b.results[0].latency_ns, b.results[1].latency_ns)));
  }
  SUBCASE("8 identical probes across 8 banks") {
    std::vector<ProbeCommand> cmds;
    for (PageId p = 0; p < 8; ++p) cmds.push_back({static_cast<Key>(p + 1), p, 0, 1024});
    Rlu serial(f.geometry, f.timing, PagePolicy::Closed, perf_pe());
    Rlu parallel(f.geometry, f.timing, PagePolicy::Closed, perf_pe());
    const BatchResult s = serial.execute_batch(cmds, f.store, ParallelismPolicy::Serial);
    const BatchResult p = parallel.execute_batch(cmds, f.store, ParallelismPolicy::BankParallel);
    CHECK(s.makespan_ns == doctest::Approx(8 * 203.75));
    CHECK(p.makespan_ns == doctest::Approx(203.75));
    for (std::size_t i = 0; i < cmds.size(); ++i) {
      CHECK(s.results[i].status == p.results[i].status);
      CHECK(s.results[i].value == p.results[i].value);
      CHECK(s.results[i].latency_ns == doctest::Approx(p.results[i].latency_ns));
    }
  }
}

TEST_CASE("invalid commands") {
  Fixture f;
  Rlu rlu(f.geometry, f.timing, PagePolicy::Closed, area_pe());
  CHECK_THROWS_AS(rlu.execute_probe({1, 500, 0, 1024}, f.store), RangeError);
  CHECK_THROWS_AS(rlu.execute_probe({1, 0, 0, 2048}, f.store), RangeError);
}
