// Command-line front-end: dataset generation, simulated/software benchmark
// runs, the dictionary bucket-length experiment, and report comparison.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hashmem/backends.hpp"
#include "hashmem/config.hpp"
#include "hashmem/errors.hpp"
#include "hashmem/hashmem_map.hpp"
#include "hashmem/report.hpp"
#include "hashmem/workload.hpp"

namespace {

using namespace hashmem;

struct RunArgs {
  std::vector<std::string> backends;
  std::string dataset;
  double probe_fraction = 0.1;
  double miss_fraction = 0.0;
  std::uint64_t seed = 7;
  std::string config;
  std::string report = "csv";
  std::string policy = "serial";
  bool cam_mode = false;
  bool open_page = false;
  std::uint64_t buckets = 0;
  std::string out;
  std::string trace;
  int reps = 5;
};

void add_run_options(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--backend", a.backends,
                  "pim-area | pim-perf | conventional | chained | tree | hopscotch (repeatable)")
      ->required()
      ->delimiter(',');
  cmd->add_option("--dataset", a.dataset, "binary dataset written by `generate`")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--probe-fraction", a.probe_fraction, "fraction of keys probed")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--miss-fraction", a.miss_fraction, "fraction of probes replaced by absent keys")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", a.seed, "probe selection seed");
  cmd->add_option("--config", a.config, "key=value DRAM/PE config file")->check(CLI::ExistingFile);
  cmd->add_option("--report", a.report, "report format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--policy", a.policy, "command scheduling")
      ->check(CLI::IsMember({"serial", "bank-parallel"}));
  cmd->add_flag("--cam-mode", a.cam_mode, "single-tick match for the performance-optimized PE");
  cmd->add_flag("--open-page", a.open_page, "keep rows open between probes");
  cmd->add_option("--buckets", a.buckets, "bucket count (default: half a page per bucket)");
  cmd->add_option("--out", a.out, "write the report here instead of stdout");
  cmd->add_option("--trace", a.trace, "dump every simulated DRAM event as CSV");
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

BackendOptions backend_options(const RunArgs& a, std::uint64_t n_pairs) {
  BackendOptions o;
  if (!a.config.empty()) o.sim = SimConfig::load(a.config);
  if (a.open_page) o.sim.page_policy = PagePolicy::Open;
  o.cam_mode = a.cam_mode;
  o.hash.bucket_count =
      a.buckets ? a.buckets : default_bucket_count(n_pairs, o.sim.geometry.page_capacity());
  o.expected_pairs = std::max<std::uint64_t>(1, n_pairs);
  return o;
}

int do_run(const RunArgs& a, int reps) {
  const auto pairs = load_dataset(a.dataset);
  auto probes = select_probes(pairs, a.probe_fraction, a.seed);
  if (a.miss_fraction > 0.0) inject_misses(probes, pairs, a.miss_fraction, a.seed);
  const BackendOptions options = backend_options(a, pairs.size());

  RunOptions run;
  run.policy = a.policy == "bank-parallel" ? ParallelismPolicy::BankParallel : ParallelismPolicy::Serial;
  std::ofstream trace;
  if (!a.trace.empty()) {
    trace.open(a.trace);
    if (!trace) throw IoError("cannot write " + a.trace);
    trace << trace_csv_header() << '\n';
    run.trace_sink = [&trace](const TraceEvent& e) { trace << trace_csv_line(e) << '\n'; };
  }

  std::vector<BenchReport> reports;
  int status = 0;
  for (const auto& name : a.backends) {
    const BackendKind kind = parse_backend(name);
    const BenchRun r = reps > 1 ? run_repeated(kind, options, pairs, probes, reps, run)
                                : run_benchmark(kind, options, pairs, probes, run);
    if (r.correct != probes.size()) {
      std::cerr << name << ": " << probes.size() - r.correct << " probes returned a wrong result\n";
      status = 1;
    }
    if (r.protocol_violations) {
      std::cerr << name << ": " << r.protocol_violations << " DRAM protocol violations\n";
      status = 1;
    }
    if (is_simulated(kind) && run.policy == ParallelismPolicy::BankParallel) {
      std::cerr << name << ": makespan_ns=" << r.makespan_ns << '\n';
    }
    reports.push_back(r.report);
  }
  write_text(a.out, a.report == "json" ? reports_to_json(reports) : reports_to_csv(reports));
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HashMem processing-in-memory hashmap simulator"};
  app.require_subcommand(1);

  // generate
  std::uint64_t gen_n = 1'000'000;
  std::uint64_t gen_seed = 42;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "write a random key-value dataset");
  generate->add_option("--n", gen_n, "number of pairs");
  generate->add_option("--seed", gen_seed, "RNG seed");
  generate->add_option("--out", gen_out, "output file")->required();

  // run / bench
  RunArgs run_args;
  auto* run = app.add_subcommand("run", "insert a dataset and probe a sample of its keys");
  add_run_options(run, run_args);

  RunArgs bench_args;
  auto* bench = app.add_subcommand("bench", "like run, reporting the median of repeated runs");
  add_run_options(bench, bench_args);
  bench->add_option("--reps", bench_args.reps, "repetitions")->check(CLI::PositiveNumber);

  // analyze-buckets
  std::string wordlist;
  std::uint64_t n_words = 350'000;
  std::uint64_t n_buckets = 4096;
  std::string ab_out;
  std::string ab_config;
  std::uint32_t co_locate = 0;
  auto* analyze = app.add_subcommand("analyze-buckets", "bucket lengths of a dictionary word list");
  analyze->add_option("--wordlist", wordlist, "one word per line")->required()->check(CLI::ExistingFile);
  analyze->add_option("--n-words", n_words, "number of lines to read");
  analyze->add_option("--buckets", n_buckets, "bucket count")->check(CLI::PositiveNumber);
  analyze->add_option("--out", ab_out, "CSV of bucket_id,length");
  analyze->add_option("--config", ab_config, "key=value DRAM config")->check(CLI::ExistingFile);
  analyze->add_option("--co-locate", co_locate,
                      "also pack buckets of at most this many pairs into shared pages");

  // export-map
  std::string em_dataset;
  std::string em_config;
  std::uint64_t em_buckets = 0;
  std::string em_prefix;
  auto* export_map = app.add_subcommand("export-map", "build a map and write its pairs and bookkeeping");
  export_map->add_option("--dataset", em_dataset)->required()->check(CLI::ExistingFile);
  export_map->add_option("--config", em_config)->check(CLI::ExistingFile);
  export_map->add_option("--buckets", em_buckets);
  export_map->add_option("--out", em_prefix, "writes PREFIX.hmkv and PREFIX.books")->required();

  // compare
  std::string baseline_path;
  std::string subject_path;
  bool cross_domain = false;
  auto* compare = app.add_subcommand("compare", "speedup of one report over another");
  compare->add_option("--baseline", baseline_path)->required()->check(CLI::ExistingFile);
  compare->add_option("--subject", subject_path)->required()->check(CLI::ExistingFile);
  compare->add_flag("--allow-cross-domain", cross_domain,
                    "allow simulated vs wall-clock (result is indicative only)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) {
      const auto pairs = generate_dataset({gen_n, 0.1, gen_seed});
      save_dataset(gen_out, pairs);
      std::cout << "wrote " << pairs.size() << " pairs to " << gen_out << '\n';
      return 0;
    }
    if (*run) return do_run(run_args, 1);
    if (*bench) return do_run(bench_args, bench_args.reps);

    if (*analyze) {
      const auto keys = ingest_wordlist(std::filesystem::path(wordlist), n_words);
      const SimConfig sim = ab_config.empty() ? SimConfig{} : SimConfig::load(ab_config);
      HashConfig hash;
      hash.bucket_count = n_buckets;
      HashMemMap map(sim.geometry, hash);
      for (Key k : keys) {
        if (map.insert(k, 0) == InsertStatus::AllocationFailure) {
          throw CapacityError("ran out of pages while inserting the word list");
        }
      }
      const BucketHistogram h = map.bucket_histogram();
      std::string csv = "bucket_id,length\n";
      for (std::size_t b = 0; b < h.lengths.size(); ++b) {
        csv += std::to_string(b) + "," + std::to_string(h.lengths[b]) + "\n";
      }
      if (!ab_out.empty()) write_text(ab_out, csv);
      std::printf("words=%zu buckets=%llu mean=%.4f max=%llu max_over_mean=%.4f cv=%.4f pages=%llu\n",
                  keys.size(), static_cast<unsigned long long>(n_buckets), h.mean,
                  static_cast<unsigned long long>(h.max), h.mean > 0 ? h.max / h.mean : 0.0,
                  h.coefficient_of_variation, static_cast<unsigned long long>(map.pages_allocated()));
      if (co_locate > 0) {
        const auto rep = map.co_locate_buckets(co_locate);
        std::printf("co-located %llu buckets, pages %llu -> %llu\n",
                    static_cast<unsigned long long>(rep.buckets_relocated),
                    static_cast<unsigned long long>(rep.pages_before),
                    static_cast<unsigned long long>(rep.pages_after));
      }
      return 0;
    }

    if (*export_map) {
      const auto pairs = load_dataset(em_dataset);
      const SimConfig sim = em_config.empty() ? SimConfig{} : SimConfig::load(em_config);
      HashConfig hash;
      hash.bucket_count =
          em_buckets ? em_buckets : default_bucket_count(pairs.size(), sim.geometry.page_capacity());
      HashMemMap map(sim.geometry, hash);
      for (const auto& p : pairs) {
        if (map.insert(p.key, p.value) == InsertStatus::AllocationFailure) {
          throw CapacityError("ran out of pages while building the map");
        }
      }
      save_dataset(em_prefix + ".hmkv", map.export_pairs());
      std::ofstream books(em_prefix + ".books");
      if (!books) throw IoError("cannot write " + em_prefix + ".books");
      map.bookkeeping().write_sidecar(books);
      std::cout << "exported " << map.size() << " pairs in " << map.pages_allocated() << " pages\n";
      return 0;
    }

    if (*compare) {
      const auto base = load_reports(baseline_path);
      const auto subj = load_reports(subject_path);
      if (base.empty() || subj.empty()) throw IoError("report has no rows");
      const Speedup s = compute_speedup(base.front(), subj.front(), cross_domain);
      std::printf("speedup=%.4f baseline=%s subject=%s%s\n", s.ratio,
                  std::string(backend_name(base.front().backend)).c_str(),
                  std::string(backend_name(subj.front().backend)).c_str(),
                  s.cross_domain ? " (cross-domain: simulated vs wall-clock, indicative only)" : "");
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
