#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_set>
#include <vector>

#include "hashmem/errors.hpp"
#include "hashmem/report.hpp"
#include "hashmem/workload.hpp"

using namespace hashmem;

namespace {

BenchReport report(BackendKind kind, double mean, std::uint64_t n = 100) {
  BenchReport r;
  r.backend = kind;
  r.n_probes = n;
  r.mean_ns = mean;
  r.median_ns = mean;
  r.p99_ns = mean * 2;
  r.total_ns = mean * static_cast<double>(n);
  r.activations = n;
  r.bytes_on_bus = 64 * n;
  return r;
}

}  // namespace

TEST_CASE("generate_dataset") {
  CHECK(generate_dataset({0, 0.1, 1}).empty());
  const auto a = generate_dataset({1'000'000, 0.1, 42});
  const auto b = generate_dataset({1'000'000, 0.1, 42});
  CHECK(a == b);
  std::vector<Key> keys;
  for (const auto& p : a) keys.push_back(p.key);
  std::sort(keys.begin(), keys.end());
  CHECK(std::adjacent_find(keys.begin(), keys.end()) == keys.end());
  CHECK(keys.size() == 1'000'000);
  CHECK(std::none_of(keys.begin(), keys.end(), is_sentinel));
  CHECK(generate_dataset({1000, 0.1, 43}) != generate_dataset({1000, 0.1, 42}));
  CHECK_THROWS_AS(generate_dataset({kKeySpace + 1, 0.1, 1}), CapacityError);

  std::ostringstream out1, out2;
  write_dataset(out1, a);
  write_dataset(out2, b);
  CHECK(out1.str() == out2.str());
}

TEST_CASE("select_probes") {
  const auto pairs = generate_dataset({1'000'000, 0.1, 42});
  const auto probes = select_probes(pairs, 0.1, 9);
  CHECK(probes.size() == 100'000);
  CHECK(select_probes(pairs, 0.1, 9) == probes);
  std::unordered_set<Key> present;
  for (const auto& p : pairs) present.insert(p.key);
  CHECK(std::all_of(probes.begin(), probes.end(), [&](Key k) { return present.contains(k); }));
  CHECK(std::set<Key>(probes.begin(), probes.end()).size() == probes.size());

  const auto small = generate_dataset({50, 0.1, 1});
  const auto all = select_probes(small, 1.0, 2);
  CHECK(all.size() == 50);
  CHECK(std::set<Key>(all.begin(), all.end()).size() == 50);
  CHECK(select_probes(small, 0.07, 2).size() == 3);  // floor(3.5)
  CHECK_THROWS_AS(select_probes(small, 0.0, 2), RangeError);
  CHECK_THROWS_AS(select_probes(small, 1.5, 2), RangeError);
}

TEST_CASE("inject_misses") {
  const auto pairs = generate_dataset({10'000, 0.1, 42});
  auto probes = select_probes(pairs, 0.5, 1);
  inject_misses(probes, pairs, 0.2, 3);
  std::unordered_set<Key> present;
  for (const auto& p : pairs) present.insert(p.key);
  const auto misses = std::count_if(probes.begin(), probes.end(), [&](Key k) { return !present.contains(k); });
  CHECK(misses == 1'000);
  CHECK(probes.size() == 5'000);
}

TEST_CASE("ingest_wordlist") {
  std::istringstream empty("");
  CHECK(ingest_wordlist(empty).empty());

  std::istringstream dup("apple\nbanana\napple\r\ncherry\nbanana\n");
  const auto keys = ingest_wordlist(dup);
  CHECK(keys.size() == 3);
  CHECK(std::set<Key>(keys.begin(), keys.end()).size() == 3);

  std::istringstream limited("a\nb\nc\nd\n");
  CHECK(ingest_wordlist(limited, 2).size() == 2);

  std::string text;
  for (int i = 0; i < 350'000; ++i) text += "w" + std::to_string(i * 31) + "\n";
  std::istringstream big(text);
  const auto many = ingest_wordlist(big);
  CHECK(many.size() == 350'000);
  CHECK(std::unordered_set<Key>(many.begin(), many.end()).size() == 350'000);
  CHECK(std::none_of(many.begin(), many.end(), is_sentinel));

  CHECK_THROWS_AS(ingest_wordlist(std::filesystem::path("/nonexistent/words.txt")), IoError);
}

TEST_CASE("dataset file format") {
  const std::vector<KvPair> pairs{{1, 2}, {0x01020304, 0xAABBCCDD}};
  std::ostringstream out;
  write_dataset(out, pairs);
  const std::string bytes = out.str();
  REQUIRE(bytes.size() == 16 + 2 * 8);
  CHECK(bytes.substr(0, 4) == "HMKV");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 2);
  CHECK(static_cast<unsigned char>(bytes[24]) == 0x04);
  CHECK(static_cast<unsigned char>(bytes[31]) == 0xAA);
  std::istringstream in(bytes);
  CHECK(read_dataset(in) == pairs);

  std::istringstream bad_magic("XXXX");
  CHECK_THROWS_AS(read_dataset(bad_magic), IoError);
  std::istringstream truncated(bytes.substr(0, 20));
  CHECK_THROWS_AS(read_dataset(truncated), IoError);
}

TEST_CASE("median and percentile") {
  CHECK(median({}) == 0.0);
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 3, 2}) == 2.5);
  std::vector<double> v;
  for (int i = 1; i <= 100; ++i) v.push_back(i);
  CHECK(percentile(v, 99) == 99.0);
  CHECK(percentile(v, 100) == 100.0);
  CHECK(percentile({5.0}, 99) == 5.0);
}

TEST_CASE("compute_speedup") {
  const BenchReport conv = report(BackendKind::ConventionalSim, 489.25);
  const BenchReport perf = report(BackendKind::PimPerf, 203.75);
  CHECK(compute_speedup(conv, conv).ratio == 1.0);
  CHECK(compute_speedup(conv, perf).ratio == doctest::Approx(489.25 / 203.75));
  CHECK(compute_speedup(conv, perf).ratio == doctest::Approx(2.4012).epsilon(1e-4));
  CHECK(compute_speedup(perf, conv).ratio < 1.0);

  const BenchReport tree = report(BackendKind::SoftTree, 300.0);
  CHECK_THROWS_AS(compute_speedup(tree, perf), UsageError);
  const Speedup cross = compute_speedup(tree, perf, true);
  CHECK(cross.cross_domain);
  CHECK(cross.ratio == doctest::Approx(300.0 / 203.75));
  CHECK_THROWS_AS(compute_speedup(conv, report(BackendKind::PimPerf, 200.0, 99)), UsageError);
}

TEST_CASE("report formats round trip") {
  const std::vector<BenchReport> rows{report(BackendKind::PimArea, 680.5), report(BackendKind::SoftHopscotch, 12.25)};
  const std::string csv = reports_to_csv(rows);
  CHECK(csv.rfind("backend,n_probes,mean_ns,median_ns,p99_ns,total_ns,activations,bytes_on_bus\n", 0) == 0);
  CHECK(csv.find("pim-area,100,680.5000,680.5000,1361.0000,68050.0000,100,6400\n") != std::string::npos);
  const auto from_csv = parse_reports(csv);
  const auto from_json = parse_reports(reports_to_json(rows));
  REQUIRE(from_csv.size() == 2);
  REQUIRE(from_json.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(from_csv[i].backend == rows[i].backend);
    CHECK(from_json[i].backend == rows[i].backend);
    CHECK(from_csv[i].mean_ns == rows[i].mean_ns);
    CHECK(from_json[i].mean_ns == rows[i].mean_ns);
    CHECK(from_json[i].bytes_on_bus == rows[i].bytes_on_bus);
  }
  CHECK_THROWS_AS(parse_reports("backend,n_probes\npim-area,1\n"), IoError);
  CHECK_THROWS_AS(parse_reports("[{\"backend\": \"tree\"}]"), IoError);
  CHECK_THROWS_AS(parse_reports(""), IoError);
}

TEST_CASE("run_benchmark") {
  const auto pairs = generate_dataset({20'000, 0.1, 1});
  const auto probes = select_probes(pairs, 0.1, 2);
  BackendOptions o;
  o.hash.bucket_count = default_bucket_count(pairs.size(), o.sim.geometry.page_capacity());
  o.expected_pairs = pairs.size();

  const BenchRun none = run_benchmark(BackendKind::PimPerf, o, pairs, {});
  CHECK(none.report.n_probes == 0);
  CHECK(none.report.total_ns == 0.0);
  CHECK(none.report.mean_ns == 0.0);

  for (BackendKind k : kAllBackends) {
    const BenchRun r = run_benchmark(k, o, pairs, probes);
    CHECK(r.report.n_probes == probes.size());
    CHECK(r.correct == probes.size());
    CHECK(r.found == probes.size());
    CHECK(r.protocol_violations == 0);
    if (is_simulated(k)) {
      CHECK(r.report.activations >= probes.size());
      if (k != BackendKind::ConventionalSim) CHECK(r.protocol_events > 0);
    }
  }

  const BenchRun perf = run_benchmark(BackendKind::PimPerf, o, pairs, probes);
  CHECK(perf.report.mean_ns == doctest::Approx(203.75));
  CHECK(perf.report.p99_ns == doctest::Approx(203.75));
  const BenchRun area = run_benchmark(BackendKind::PimArea, o, pairs, probes);
  CHECK(perf.report.mean_ns < area.report.mean_ns);
  CHECK(reports_to_csv(std::vector<BenchReport>{area.report}) ==
        reports_to_csv(std::vector<BenchReport>{run_benchmark(BackendKind::PimArea, o, pairs, probes).report}));

  RunOptions par;
  par.policy = ParallelismPolicy::BankParallel;
  const BenchRun p = run_benchmark(BackendKind::PimArea, o, pairs, probes, par);
  CHECK(p.correct == probes.size());
  CHECK(p.protocol_violations == 0);
  CHECK(p.makespan_ns < area.makespan_ns);
  CHECK(p.report.mean_ns == doctest::Approx(area.report.mean_ns));

  BackendOptions tight = o;
  tight.page_limit = 2;
  CHECK_THROWS_AS(run_benchmark(BackendKind::PimArea, tight, pairs, probes), CapacityError);
}
