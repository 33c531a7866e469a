#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hashmem/backends.hpp"
#include "hashmem/workload.hpp"

namespace hashmem {

enum class TimeDomain { Simulated, WallClock };

struct BenchReport {
  BackendKind backend = BackendKind::SoftChained;
  std::uint64_t n_probes = 0;
  double total_ns = 0.0;
  double mean_ns = 0.0;
  double median_ns = 0.0;
  double p99_ns = 0.0;
  std::uint64_t activations = 0;
  std::uint64_t bytes_on_bus = 0;

  TimeDomain domain() const {
    return is_simulated(backend) ? TimeDomain::Simulated : TimeDomain::WallClock;
  }
};

/// Everything a run produces besides the report row.
struct BenchRun {
  BenchReport report;
  std::optional<RluStats> stats;  ///< simulated backends only
  std::uint64_t found = 0;
  std::uint64_t correct = 0;  ///< probes whose status and value match the dataset
  double makespan_ns = 0.0;
  std::uint64_t protocol_events = 0;
  std::uint64_t protocol_violations = 0;
  std::vector<std::string> violation_samples;
};

struct RunOptions {
  ParallelismPolicy policy = ParallelismPolicy::Serial;
  bool check_protocol = true;
  /// Receives every DRAM event of every command, in issue order.
  std::function<void(const TraceEvent&)> trace_sink;
};

/// Inserts `pairs` into a fresh backend, then probes `probes` in order.
/// Simulated backends aggregate model latencies; software backends are timed
/// with a monotonic clock around the probe loop only.
BenchRun run_benchmark(BackendKind kind, const BackendOptions& options,
                       std::span<const KvPair> pairs, std::span<const Key> probes,
                       const RunOptions& run = {});

/// Median (by mean_ns) of `reps` independent runs.
BenchRun run_repeated(BackendKind kind, const BackendOptions& options,
                      std::span<const KvPair> pairs, std::span<const Key> probes, int reps,
                      const RunOptions& run = {});

/// Median of an unsorted sample (mean of the middle two for even sizes).
double median(std::vector<double> values);
/// Nearest-rank percentile, p in (0, 100].
double percentile(std::vector<double> values, double p);

struct Speedup {
  double ratio = 0.0;
  bool cross_domain = false;  ///< indicative only
};

/// baseline mean / subject mean. Throws UsageError when the reports come from
/// different time domains (unless allowed) or different probe counts.
Speedup compute_speedup(const BenchReport& baseline, const BenchReport& subject,
                        bool allow_cross_domain = false);

std::string report_csv_header();
std::string report_csv_row(const BenchReport& r);
std::string reports_to_csv(std::span<const BenchReport> reports);
std::string reports_to_json(std::span<const BenchReport> reports);
/// Accepts either format; detects by the first non-blank character.
std::vector<BenchReport> parse_reports(const std::string& text);
std::vector<BenchReport> load_reports(const std::filesystem::path& path);

}  // namespace hashmem
