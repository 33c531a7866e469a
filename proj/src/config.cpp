#include "hashmem/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hashmem/errors.hpp"

namespace hashmem {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_double(const std::string& text, double& out) {
  // std::from_chars for double is available in libstdc++ 11.
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::uint32_t narrow_u32(std::uint64_t v, const std::string& key) {
  if (v > 0xFFFFFFFFull) throw ConfigError(key + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected `name = value`");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    double probe = 0.0;
    if (key.empty() || !parse_double(value, probe)) {
      throw ConfigError("line " + std::to_string(line_no) + ": `" + value +
                        "` is not an integer or decimal");
    }
    if (!cfg.values_.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key " + key);
    }
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse(in);
}

std::optional<double> KeyValueConfig::number(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  double v = 0.0;
  parse_double(it->second, v);
  return v;
}

std::optional<std::uint64_t> KeyValueConfig::unsigned_value(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  const std::string& text = it->second;
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(key + " must be a non-negative integer, got `" + text + "`");
  }
  return v;
}

double KeyValueConfig::require_number(const std::string& key) const {
  auto v = number(key);
  if (!v) throw ConfigError("missing required key " + key);
  return *v;
}

std::uint64_t KeyValueConfig::require_unsigned(const std::string& key) const {
  auto v = unsigned_value(key);
  if (!v) throw ConfigError("missing required key " + key);
  return *v;
}

SimConfig SimConfig::from(const KeyValueConfig& kv) {
  SimConfig c;
  auto req32 = [&](const char* key) { return narrow_u32(kv.require_unsigned(key), key); };

  c.geometry.channels = req32("channels");
  c.geometry.ranks_per_channel = req32("ranks_per_channel");
  c.geometry.banks_per_rank = req32("banks_per_rank");
  c.geometry.subarrays_per_bank = req32("subarrays_per_bank");
  c.geometry.rows_per_subarray = req32("rows_per_subarray");
  c.geometry.row_size_bytes = req32("row_size_bytes");

  c.timing.tck_ns = kv.require_number("tCK_ns");
  c.timing.trcd_cycles = req32("tRCD_cycles");
  c.timing.trp_cycles = req32("tRP_cycles");
  c.timing.tcl_cycles = req32("tCL_cycles");
  c.timing.tras_cycles = req32("tRAS_cycles");
  c.timing.burst_cycles_per_line = req32("burst_cycles_per_line");
  c.timing.pe_tick_ns = kv.require_number("pe_tick_ns");

  if (auto v = kv.unsigned_value("open_page")) c.page_policy = *v ? PagePolicy::Open : PagePolicy::Closed;
  if (auto v = kv.number("cpu_scan_ns_per_line")) c.cpu_scan_ns_per_line = *v;
  if (auto v = kv.unsigned_value("key_bits")) c.key_bits = narrow_u32(*v, "key_bits");
  if (auto v = kv.unsigned_value("value_bits")) c.value_bits = narrow_u32(*v, "value_bits");
  if (auto v = kv.unsigned_value("include_value_readout_ticks")) c.include_value_readout_ticks = *v != 0;

  c.geometry.validate();
  c.timing.validate();
  if (c.cpu_scan_ns_per_line < 0.0) throw ConfigError("cpu_scan_ns_per_line must be >= 0");
  return c;
}

SimConfig SimConfig::load(const std::filesystem::path& path) { return from(KeyValueConfig::load(path)); }

std::string SimConfig::to_text() const {
  std::ostringstream out;
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "# geometry\n"
      << "channels = " << geometry.channels << '\n'
      << "ranks_per_channel = " << geometry.ranks_per_channel << '\n'
      << "banks_per_rank = " << geometry.banks_per_rank << '\n'
      << "subarrays_per_bank = " << geometry.subarrays_per_bank << '\n'
      << "rows_per_subarray = " << geometry.rows_per_subarray << '\n'
      << "row_size_bytes = " << geometry.row_size_bytes << '\n'
      << "# timing\n"
      << "tCK_ns = " << num(timing.tck_ns) << '\n'
      << "tRCD_cycles = " << timing.trcd_cycles << '\n'
      << "tRP_cycles = " << timing.trp_cycles << '\n'
      << "tCL_cycles = " << timing.tcl_cycles << '\n'
      << "tRAS_cycles = " << timing.tras_cycles << '\n'
      << "burst_cycles_per_line = " << timing.burst_cycles_per_line << '\n'
      << "pe_tick_ns = " << num(timing.pe_tick_ns) << '\n'
      << "# optional\n"
      << "open_page = " << (page_policy == PagePolicy::Open ? 1 : 0) << '\n'
      << "cpu_scan_ns_per_line = " << num(cpu_scan_ns_per_line) << '\n'
      << "key_bits = " << key_bits << '\n'
      << "value_bits = " << value_bits << '\n'
      << "include_value_readout_ticks = " << (include_value_readout_ticks ? 1 : 0) << '\n';
  return out.str();
}

}  // namespace hashmem
