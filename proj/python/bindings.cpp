#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hashmem/backends.hpp"
#include "hashmem/config.hpp"
#include "hashmem/dram.hpp"
#include "hashmem/errors.hpp"
#include "hashmem/hashmem_map.hpp"
#include "hashmem/hopscotch.hpp"
#include "hashmem/pe.hpp"
#include "hashmem/report.hpp"
#include "hashmem/rlu.hpp"
#include "hashmem/workload.hpp"

namespace py = pybind11;
using namespace hashmem;

namespace {

py::bytes cache_line_bytes(const CacheLine& line) {
  return py::bytes(reinterpret_cast<const char*>(line.data()), line.size());
}

void bind_dram(py::module_& m) {
  py::class_<DramGeometry>(m, "DramGeometry")
      .def(py::init<>())
      .def_readwrite("channels", &DramGeometry::channels)
      .def_readwrite("ranks_per_channel", &DramGeometry::ranks_per_channel)
      .def_readwrite("banks_per_rank", &DramGeometry::banks_per_rank)
      .def_readwrite("subarrays_per_bank", &DramGeometry::subarrays_per_bank)
      .def_readwrite("rows_per_subarray", &DramGeometry::rows_per_subarray)
      .def_readwrite("row_size_bytes", &DramGeometry::row_size_bytes)
      .def("total_pages", &DramGeometry::total_pages)
      .def("page_capacity", &DramGeometry::page_capacity);

  py::class_<DramTiming>(m, "DramTiming")
      .def(py::init<>())
      .def_readwrite("tck_ns", &DramTiming::tck_ns)
      .def_readwrite("trcd_cycles", &DramTiming::trcd_cycles)
      .def_readwrite("trp_cycles", &DramTiming::trp_cycles)
      .def_readwrite("tcl_cycles", &DramTiming::tcl_cycles)
      .def_readwrite("tras_cycles", &DramTiming::tras_cycles)
      .def_readwrite("burst_cycles_per_line", &DramTiming::burst_cycles_per_line)
      .def_readwrite("pe_tick_ns", &DramTiming::pe_tick_ns);

  py::enum_<PagePolicy>(m, "PagePolicy")
      .value("Closed", PagePolicy::Closed)
      .value("Open", PagePolicy::Open);

  py::class_<RowAddress>(m, "RowAddress")
      .def(py::init<>())
      .def_readwrite("channel", &RowAddress::channel)
      .def_readwrite("rank", &RowAddress::rank)
      .def_readwrite("bank", &RowAddress::bank)
      .def_readwrite("subarray", &RowAddress::subarray)
      .def_readwrite("row", &RowAddress::row)
      .def("as_tuple", [](const RowAddress& a) {
        return py::make_tuple(a.channel, a.rank, a.bank, a.subarray, a.row);
      });

  py::class_<SubarrayState>(m, "SubarrayState")
      .def(py::init<>())
      .def_readwrite("open_row", &SubarrayState::open_row);

  m.def("map_page_to_row", &map_page_to_row, py::arg("page_id"), py::arg("geometry"));
  m.def("row_to_page", &row_to_page, py::arg("addr"), py::arg("geometry"));
  m.def("activate", &activate, py::arg("addr"), py::arg("state"), py::arg("timing"));
  m.def("column_access", &column_access, py::arg("n_bytes"), py::arg("timing"));

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("geometry", &SimConfig::geometry)
      .def_readwrite("timing", &SimConfig::timing)
      .def_readwrite("page_policy", &SimConfig::page_policy)
      .def_readwrite("cpu_scan_ns_per_line", &SimConfig::cpu_scan_ns_per_line)
      .def_static("load", [](const std::string& path) { return SimConfig::load(path); })
      .def("to_text", &SimConfig::to_text);
}

void bind_pe(py::module_& m) {
  py::enum_<PeVariant>(m, "PeVariant")
      .value("AreaOptimized", PeVariant::AreaOptimized)
      .value("PerfOptimized", PeVariant::PerfOptimized);

  py::class_<PeConfig>(m, "PeConfig")
      .def(py::init<>())
      .def_readwrite("variant", &PeConfig::variant)
      .def_readwrite("key_bits", &PeConfig::key_bits)
      .def_readwrite("value_bits", &PeConfig::value_bits)
      .def_readwrite("cam_mode", &PeConfig::cam_mode)
      .def_readwrite("include_value_readout_ticks", &PeConfig::include_value_readout_ticks);

  py::class_<MatchResult>(m, "MatchResult")
      .def_readonly("found", &MatchResult::found)
      .def_readonly("value", &MatchResult::value)
      .def_readonly("column_index", &MatchResult::column_index)
      .def_readonly("pe_ticks", &MatchResult::pe_ticks);

  py::class_<RowImage>(m, "RowImage")
      .def("capacity", &RowImage::capacity)
      .def("serialize", [](const RowImage& r) {
        const auto bytes = r.serialize();
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      });

  m.def(
      "encode_row",
      [](const std::vector<std::pair<Key, Value>>& pairs, std::size_t capacity) {
        std::vector<KvPair> kv;
        for (auto [k, v] : pairs) kv.push_back({k, v});
        return encode_row(kv, capacity);
      },
      py::arg("pairs"), py::arg("capacity"));
  m.def("decode_row", [](const RowImage& row) {
    std::vector<std::pair<Key, Value>> out;
    for (const auto& p : decode_row(row)) out.emplace_back(p.key, p.value);
    return out;
  });
  m.def(
      "area_scan",
      [](const RowImage& row, Key key, std::optional<std::size_t> start,
         std::optional<std::size_t> end) {
        return area_scan(row, key, start.value_or(0), end.value_or(row.capacity()));
      },
      py::arg("row"), py::arg("key"), py::arg("start") = py::none(), py::arg("end") = py::none());
  m.def(
      "perf_scan",
      [](const RowImage& row, Key key, const PeConfig& config) {
        return perf_scan(bitslice_encode(row, std::min<std::uint32_t>(config.key_bits, 32)), key,
                         config);
      },
      py::arg("row"), py::arg("key"), py::arg("config"));
  m.def(
      "pad_to_cache_line",
      [](std::optional<Value> v) { return cache_line_bytes(pad_to_cache_line(v)); },
      py::arg("value") = py::none());
}

void bind_map(py::module_& m) {
  py::class_<HashConfig>(m, "HashConfig")
      .def(py::init<>())
      .def_readwrite("bucket_count", &HashConfig::bucket_count)
      .def_readwrite("multiplier", &HashConfig::multiplier)
      .def_readwrite("seed", &HashConfig::seed);
  m.def("hash_key", &hash_key, py::arg("key"), py::arg("config"));
  m.def("default_bucket_count", &default_bucket_count);

  py::enum_<InsertStatus>(m, "InsertStatus")
      .value("Inserted", InsertStatus::Inserted)
      .value("Updated", InsertStatus::Updated)
      .value("AllocationFailure", InsertStatus::AllocationFailure);
  py::enum_<DeleteStatus>(m, "DeleteStatus")
      .value("Deleted", DeleteStatus::Deleted)
      .value("NotFound", DeleteStatus::NotFound);

  py::class_<BucketHistogram>(m, "BucketHistogram")
      .def_readonly("lengths", &BucketHistogram::lengths)
      .def_readonly("mean", &BucketHistogram::mean)
      .def_readonly("max", &BucketHistogram::max)
      .def_readonly("coefficient_of_variation", &BucketHistogram::coefficient_of_variation);

  py::class_<CoLocationReport>(m, "CoLocationReport")
      .def_readonly("candidates", &CoLocationReport::candidates)
      .def_readonly("buckets_relocated", &CoLocationReport::buckets_relocated)
      .def_readonly("pages_before", &CoLocationReport::pages_before)
      .def_readonly("pages_after", &CoLocationReport::pages_after);

  py::class_<HashMemMap>(m, "HashMemMap")
      .def(py::init<const DramGeometry&, const HashConfig&, std::uint64_t, std::uint32_t>(),
           py::arg("geometry"), py::arg("hash"), py::arg("page_limit") = 0,
           py::arg("sliced_key_bits") = 0)
      .def("insert", &HashMemMap::insert)
      .def("erase", &HashMemMap::erase)
      .def("find", &HashMemMap::find)
      .def("chain_length",
           [](const HashMemMap& map, Key key) {
             const PageChain* c = map.chain(map.bucket_of(key));
             return c ? c->entries.size() : 0;
           })
      .def("bucket_histogram", &HashMemMap::bucket_histogram)
      .def("co_locate_buckets", &HashMemMap::co_locate_buckets)
      .def("sidecar",
           [](const HashMemMap& map) {
             std::ostringstream out;
             map.bookkeeping().write_sidecar(out);
             return out.str();
           })
      .def("__len__", &HashMemMap::size)
      .def_property_readonly("pages_allocated", &HashMemMap::pages_allocated);
}

void bind_backends(py::module_& m) {
  py::enum_<BackendKind>(m, "BackendKind")
      .value("PimArea", BackendKind::PimArea)
      .value("PimPerf", BackendKind::PimPerf)
      .value("ConventionalSim", BackendKind::ConventionalSim)
      .value("SoftChained", BackendKind::SoftChained)
      .value("SoftTree", BackendKind::SoftTree)
      .value("SoftHopscotch", BackendKind::SoftHopscotch);
  m.def("parse_backend", [](const std::string& name) { return parse_backend(name); });
  m.def("backend_name", [](BackendKind k) { return std::string(backend_name(k)); });
  m.def("conventional_probe_cost", &conventional_probe_cost, py::arg("bucket_bytes"),
        py::arg("timing"), py::arg("cpu_scan_ns_per_line") = 1.0);

  py::class_<RluStats>(m, "RluStats")
      .def_readonly("probes", &RluStats::probes)
      .def_readonly("activations", &RluStats::activations)
      .def_readonly("row_hits", &RluStats::row_hits)
      .def_readonly("row_conflicts", &RluStats::row_conflicts)
      .def_readonly("pe_ticks_total", &RluStats::pe_ticks_total)
      .def_readonly("bytes_on_bus", &RluStats::bytes_on_bus);

  py::class_<BackendOptions>(m, "BackendOptions")
      .def(py::init<>())
      .def_readwrite("sim", &BackendOptions::sim)
      .def_readwrite("hash", &BackendOptions::hash)
      .def_readwrite("page_limit", &BackendOptions::page_limit)
      .def_readwrite("cam_mode", &BackendOptions::cam_mode)
      .def_readwrite("expected_pairs", &BackendOptions::expected_pairs);

  py::class_<Backend>(m, "Backend")
      .def_property_readonly("name", [](const Backend& b) { return std::string(b.name()); })
      .def("insert", [](Backend& b, Key k, Value v) { return std::string(to_string(b.insert(k, v).status)); })
      .def("erase", [](Backend& b, Key k) { return std::string(to_string(b.erase(k).status)); })
      .def("probe",
           [](Backend& b, Key k) {
             const ProbeOutcome o = b.probe(k);
             return py::make_tuple(o.found() ? py::object(py::int_(o.value)) : py::object(py::none()),
                                   o.latency_ns);
           })
      .def("stats", &Backend::stats);
  m.def("make_backend", &make_backend, py::arg("kind"), py::arg("options"));

  py::class_<HopscotchTable>(m, "HopscotchTable")
      .def(py::init<std::size_t, std::uint32_t, std::uint64_t>(), py::arg("capacity"),
           py::arg("neighborhood") = HopscotchTable::kDefaultNeighborhood, py::arg("seed") = 0)
      .def("insert",
           [](HopscotchTable& t, Key k, Value v) { return t.insert(k, v) != HopscotchStatus::TableFull; })
      .def("lookup", &HopscotchTable::lookup)
      .def("remove", &HopscotchTable::remove)
      .def("check_invariant", &HopscotchTable::check_invariant)
      .def("__len__", &HopscotchTable::size);
}

void bind_workload(py::module_& m) {
  m.def(
      "generate_dataset",
      [](std::uint64_t n, std::uint64_t seed) {
        std::vector<std::pair<Key, Value>> out;
        for (const auto& p : generate_dataset({n, 0.1, seed})) out.emplace_back(p.key, p.value);
        return out;
      },
      py::arg("n_pairs"), py::arg("seed") = 42);

  py::class_<BenchReport>(m, "BenchReport")
      .def(py::init<>())
      .def_property_readonly("backend", [](const BenchReport& r) { return std::string(backend_name(r.backend)); })
      .def_readwrite("n_probes", &BenchReport::n_probes)
      .def_readwrite("total_ns", &BenchReport::total_ns)
      .def_readwrite("mean_ns", &BenchReport::mean_ns)
      .def_readwrite("median_ns", &BenchReport::median_ns)
      .def_readwrite("p99_ns", &BenchReport::p99_ns)
      .def_readwrite("activations", &BenchReport::activations)
      .def_readwrite("bytes_on_bus", &BenchReport::bytes_on_bus);

  m.def(
      "run_benchmark",
      [](BackendKind kind, const BackendOptions& options, std::uint64_t n_pairs,
         double probe_fraction, std::uint64_t seed, bool bank_parallel) {
        const auto pairs = generate_dataset({n_pairs, probe_fraction, seed});
        const auto probes = select_probes(pairs, probe_fraction, seed + 1);
        RunOptions run;
        run.policy = bank_parallel ? ParallelismPolicy::BankParallel : ParallelismPolicy::Serial;
        py::gil_scoped_release release;
        const BenchRun r = run_benchmark(kind, options, pairs, probes, run);
        if (r.correct != probes.size()) throw std::runtime_error("benchmark probes returned wrong values");
        return r.report;
      },
      py::arg("kind"), py::arg("options"), py::arg("n_pairs"), py::arg("probe_fraction") = 0.1,
      py::arg("seed") = 42, py::arg("bank_parallel") = false);

  m.def(
      "compute_speedup",
      [](const BenchReport& baseline, const BenchReport& subject, bool allow_cross_domain) {
        return compute_speedup(baseline, subject, allow_cross_domain).ratio;
      },
      py::arg("baseline"), py::arg("subject"), py::arg("allow_cross_domain") = false);
  m.def("reports_to_csv", [](const std::vector<BenchReport>& r) { return reports_to_csv(r); });
  m.def("reports_to_json", [](const std::vector<BenchReport>& r) { return reports_to_json(r); });
}

}  // namespace

PYBIND11_MODULE(_hashmem, m) {
  m.doc() = "HashMem processing-in-memory hashmap simulator";

  py::register_exception<RangeError>(m, "RangeError", PyExc_IndexError);
  py::register_exception<InvalidKeyError>(m, "InvalidKeyError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_OverflowError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_RuntimeError);

  bind_dram(m);
  bind_pe(m);
  bind_map(m);
  bind_backends(m);
  bind_workload(m);
}
