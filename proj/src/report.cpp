#include "hashmem/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "hashmem/errors.hpp"

namespace hashmem {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lower + upper) / 2.0;
}

double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  if (!(p > 0.0) || p > 100.0) throw RangeError("percentile must be in (0, 100]");
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(v.size())));
  rank = std::clamp<std::size_t>(rank, 1, v.size());
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(rank - 1), v.end());
  return v[rank - 1];
}

namespace {

void summarize(BenchReport& r, const std::vector<double>& latencies, double total_ns) {
  r.n_probes = latencies.size();
  r.total_ns = total_ns;
  r.mean_ns = latencies.empty() ? 0.0 : total_ns / static_cast<double>(latencies.size());
  r.median_ns = median(latencies);
  r.p99_ns = percentile(latencies, 99.0);
}

}  // namespace

BenchRun run_benchmark(BackendKind kind, const BackendOptions& options,
                       std::span<const KvPair> pairs, std::span<const Key> probes,
                       const RunOptions& run) {
  auto backend = make_backend(kind, options);
  for (const auto& p : pairs) {
    if (backend->insert(p.key, p.value).status == OpStatus::AllocationFailure) {
      throw CapacityError("page allocation failed while loading the dataset into " +
                          std::string(backend->name()));
    }
  }

  std::unordered_map<Key, Value> expected;
  expected.reserve(pairs.size());
  for (const auto& p : pairs) expected[p.key] = p.value;

  BenchRun out;
  out.report.backend = kind;
  std::vector<double> latencies;
  latencies.reserve(probes.size());
  std::vector<ProbeOutcome> outcomes;

  if (is_simulated(kind)) {
    std::optional<ProtocolChecker> checker;
    if (run.check_protocol) checker.emplace(options.sim.geometry, options.sim.timing);
    std::function<void(const ProbeResult&)> on_command;
    if (checker || run.trace_sink) {
      on_command = [&](const ProbeResult& r) {
        if (checker) checker->observe(r.trace);
        if (run.trace_sink) {
          for (const auto& e : r.trace) run.trace_sink(e);
        }
      };
    }
    ProbeBatch batch = backend->probe_batch(probes, run.policy, on_command);
    double total = 0.0;
    for (const auto& o : batch.outcomes) {
      latencies.push_back(o.latency_ns);
      total += o.latency_ns;
    }
    summarize(out.report, latencies, total);
    out.makespan_ns = batch.makespan_ns;
    out.stats = backend->stats();
    if (out.stats) {
      out.report.activations = out.stats->activations;
      out.report.bytes_on_bus = out.stats->bytes_on_bus;
    }
    if (checker) {
      out.protocol_events = checker->events_seen();
      out.protocol_violations = checker->violation_count();
      for (const auto& v : checker->violations()) out.violation_samples.push_back(v.reason);
    }
    outcomes = std::move(batch.outcomes);
  } else {
    using Clock = std::chrono::steady_clock;
    outcomes.reserve(probes.size());
    const auto loop_start = Clock::now();
    for (Key k : probes) outcomes.push_back(backend->probe(k));
    const auto loop_end = Clock::now();
    const double total = std::chrono::duration<double, std::nano>(loop_end - loop_start).count();

    // Second pass for the per-probe distribution.
    for (Key k : probes) {
      const auto t0 = Clock::now();
      const ProbeOutcome o = backend->probe(k);
      const auto t1 = Clock::now();
      (void)o;
      latencies.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
    }
    summarize(out.report, latencies, total);
    out.makespan_ns = total;
  }

  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto it = expected.find(probes[i]);
    const ProbeOutcome& o = outcomes[i];
    if (o.found()) ++out.found;
    const bool ok = it == expected.end() ? !o.found() : (o.found() && o.value == it->second);
    if (ok) ++out.correct;
  }
  return out;
}

BenchRun run_repeated(BackendKind kind, const BackendOptions& options,
                      std::span<const KvPair> pairs, std::span<const Key> probes, int reps,
                      const RunOptions& run) {
  if (reps < 1) throw UsageError("reps must be >= 1");
  std::vector<BenchRun> runs;
  for (int i = 0; i < reps; ++i) runs.push_back(run_benchmark(kind, options, pairs, probes, run));
  std::stable_sort(runs.begin(), runs.end(), [](const BenchRun& a, const BenchRun& b) {
    return a.report.mean_ns < b.report.mean_ns;
  });
  return runs[runs.size() / 2];
}

Speedup compute_speedup(const BenchReport& baseline, const BenchReport& subject,
                        bool allow_cross_domain) {
  Speedup s;
  s.cross_domain = baseline.domain() != subject.domain();
  if (s.cross_domain && !allow_cross_domain) {
    throw UsageError("cannot compare simulated and wall-clock reports without --allow-cross-domain");
  }
  if (baseline.n_probes != subject.n_probes) {
    throw UsageError("reports cover different probe counts");
  }
  if (!(subject.mean_ns > 0.0)) throw UsageError("subject mean latency is zero");
  s.ratio = baseline.mean_ns / subject.mean_ns;
  return s;
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt_ns(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string report_csv_header() {
  return "backend,n_probes,mean_ns,median_ns,p99_ns,total_ns,activations,bytes_on_bus";
}

std::string report_csv_row(const BenchReport& r) {
  std::ostringstream out;
  out << backend_name(r.backend) << ',' << r.n_probes << ',' << fmt_ns(r.mean_ns) << ','
      << fmt_ns(r.median_ns) << ',' << fmt_ns(r.p99_ns) << ',' << fmt_ns(r.total_ns) << ','
      << r.activations << ',' << r.bytes_on_bus;
  return out.str();
}

std::string reports_to_csv(std::span<const BenchReport> reports) {
  std::string out = report_csv_header() + "\n";
  for (const auto& r : reports) out += report_csv_row(r) + "\n";
  return out;
}

std::string reports_to_json(std::span<const BenchReport> reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["backend"] = backend_name(r.backend);
    j["n_probes"] = r.n_probes;
    j["mean_ns"] = r.mean_ns;
    j["median_ns"] = r.median_ns;
    j["p99_ns"] = r.p99_ns;
    j["total_ns"] = r.total_ns;
    j["activations"] = r.activations;
    j["bytes_on_bus"] = r.bytes_on_bus;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

namespace {

std::vector<BenchReport> parse_json_reports(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed JSON report: ") + e.what());
  }
  if (doc.is_object()) doc = nlohmann::json::array({doc});
  std::vector<BenchReport> out;
  try {
    for (const auto& j : doc) {
      BenchReport r;
      r.backend = parse_backend(j.at("backend").get<std::string>());
      r.n_probes = j.at("n_probes").get<std::uint64_t>();
      r.mean_ns = j.at("mean_ns").get<double>();
      r.median_ns = j.at("median_ns").get<double>();
      r.p99_ns = j.at("p99_ns").get<double>();
      r.total_ns = j.at("total_ns").get<double>();
      r.activations = j.at("activations").get<std::uint64_t>();
      r.bytes_on_bus = j.at("bytes_on_bus").get<std::uint64_t>();
      out.push_back(r);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("JSON report missing a field: ") + e.what());
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  return cells;
}

std::vector<BenchReport> parse_csv_reports(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV report");
  const auto header = split_csv(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* name : {"backend", "n_probes", "mean_ns", "median_ns", "p99_ns", "total_ns",
                           "activations", "bytes_on_bus"}) {
    if (!col.contains(name)) throw IoError(std::string("CSV report lacks column ") + name);
  }
  std::vector<BenchReport> out;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw IoError("CSV row has the wrong number of cells");
    try {
      BenchReport r;
      r.backend = parse_backend(cells[col["backend"]]);
      r.n_probes = std::stoull(cells[col["n_probes"]]);
      r.mean_ns = std::stod(cells[col["mean_ns"]]);
      r.median_ns = std::stod(cells[col["median_ns"]]);
      r.p99_ns = std::stod(cells[col["p99_ns"]]);
      r.total_ns = std::stod(cells[col["total_ns"]]);
      r.activations = std::stoull(cells[col["activations"]]);
      r.bytes_on_bus = std::stoull(cells[col["bytes_on_bus"]]);
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw IoError("CSV report row is not numeric where expected: " + line);
    }
  }
  return out;
}

}  // namespace

std::vector<BenchReport> parse_reports(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw IoError("empty report");
  if (text[first] == '[' || text[first] == '{') return parse_json_reports(text);
  return parse_csv_reports(text);
}

std::vector<BenchReport> load_reports(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_reports(ss.str());
}

}  // namespace hashmem
