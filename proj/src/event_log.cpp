#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include <fmt/format.h>

#include "dcsim/counts.hpp"
#include "dcsim/digest.hpp"
#include "dcsim/error.hpp"
#include "dcsim/simulator.hpp"

namespace dcsim {
namespace {

constexpr std::string_view kHeaderPrefix = "#format_version=";
constexpr std::string_view kDigestKey = ",config_digest=";

template <class T>
T parse_number(std::string_view field, std::size_t line, const char* name) {
  T value{};
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw ParseError(fmt::format("invalid {} '{}'", name, field), line);
  }
  return value;
}

bool parse_flag(std::string_view field, std::size_t line, const char* name) {
  if (field == "0") return false;
  if (field == "1") return true;
  throw ParseError(fmt::format("{} must be 0 or 1, got '{}'", name, field), line);
}

}  // namespace

std::string digest_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

CountSummary CountSummary::from_counts(std::uint64_t n1, std::uint64_t n2, std::uint64_t n_coinc,
                                       std::uint64_t n_triggers, double duration) {
  CountSummary s;
  s.n1 = static_cast<double>(n1);
  s.n2 = static_cast<double>(n2);
  s.n_coinc = static_cast<double>(n_coinc);
  s.n_triggers = n_triggers;
  s.duration = duration;
  s.var_n1 = s.n1;
  s.var_n2 = s.n2;
  s.var_coinc = s.n_coinc;
  return s;
}

CountSummary& CountSummary::operator+=(const CountSummary& o) {
  n1 += o.n1;
  n2 += o.n2;
  n_coinc += o.n_coinc;
  n_triggers += o.n_triggers;
  duration += o.duration;
  var_n1 += o.var_n1;
  var_n2 += o.var_n2;
  var_coinc += o.var_coinc;
  clamped = clamped || o.clamped;
  return *this;
}

std::string config_digest(const RunConfig& c) {
  std::string text = fmt::format(
      "n={};p1={:.17g};p2={:.17g};beta={:.17g};vpi={:.17g};veom={:.17g};phase={:.17g};"
      "xi={:.17g};blocked={};eff={:.17g};dark={:.17g};gate={:.17g};L={:.17g};tof={:.17g};"
      "clock={:.17g};xc={:.17g};tc={:.17g};seed={};mode={};offset={:.17g};delayed={}",
      c.n_triggers, c.emission.p1, c.emission.p2, c.optics.beta_deg, c.optics.v_pi,
      c.optics.v_eom, c.optics.phase, c.optics.xi, static_cast<int>(c.blocked_path),
      c.detector.efficiency, c.detector.dark_rate, c.detector.gate, c.geometry.path_length,
      c.geometry.flight_time, c.geometry.clock_period, c.geometry.choice_position,
      c.geometry.choice_delay, c.seed, static_cast<int>(c.choice_mode), c.qrng_offset,
      c.delayed_choice ? 1 : 0);
  for (const auto& s : c.phase_schedule) text += fmt::format(";span={:.17g}x{}", s.phase, s.triggers);
  return digest_hex(text);
}

std::string format_trigger_record(const TriggerRecord& r) {
  return fmt::format("{},{},{:.3f},{:.6f},{},{},{},{}", r.trigger_index, r.choice_bit,
                     r.applied_v_eom, r.phase, static_cast<int>(r.blocked), r.click_p1 ? 1 : 0,
                     r.click_p2 ? 1 : 0, r.photon_count_emitted);
}

TriggerRecord parse_trigger_record(std::string_view line, std::size_t line_number) {
  std::string_view fields[8];
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (count == 8) throw ParseError("too many fields (expected 8)", line_number);
    fields[count++] = line.substr(start, comma == std::string_view::npos ? comma : comma - start);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (count != 8) {
    throw ParseError(fmt::format("expected 8 fields, got {}", count), line_number);
  }

  TriggerRecord r;
  r.trigger_index = parse_number<std::uint64_t>(fields[0], line_number, "trigger_index");
  r.choice_bit = parse_flag(fields[1], line_number, "choice_bit") ? 1 : 0;
  r.applied_v_eom = parse_number<double>(fields[2], line_number, "applied_v_eom");
  r.phase = parse_number<double>(fields[3], line_number, "phase");
  const auto blocked = parse_number<int>(fields[4], line_number, "blocked_path");
  if (blocked < 0 || blocked > 2) throw ParseError("blocked_path must be 0, 1 or 2", line_number);
  r.blocked = static_cast<BlockedPath>(blocked);
  r.click_p1 = parse_flag(fields[5], line_number, "click_p1");
  r.click_p2 = parse_flag(fields[6], line_number, "click_p2");
  const auto photons = parse_number<int>(fields[7], line_number, "photon_count_emitted");
  if (photons < 0 || photons > 2) throw ParseError("photon_count_emitted must be 0..2", line_number);
  r.photon_count_emitted = static_cast<std::uint8_t>(photons);
  if (r.choice_bit == 0 && r.applied_v_eom != 0.0) {
    throw ParseError("choice_bit 0 with nonzero applied voltage", line_number);
  }
  return r;
}

void write_event_log(std::ostream& out, const EventLog& log) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "{}{}{}{}\n", kHeaderPrefix, log.format_version,
                 kDigestKey, log.config_digest);
  for (const auto& r : log.records) {
    fmt::format_to(std::back_inserter(buf), "{},{},{:.3f},{:.6f},{},{},{},{}\n", r.trigger_index,
                   r.choice_bit, r.applied_v_eom, r.phase, static_cast<int>(r.blocked),
                   r.click_p1 ? 1 : 0, r.click_p2 ? 1 : 0, r.photon_count_emitted);
    if (buf.size() > (1u << 20)) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("event log write failed");
}

void write_event_log(const std::string& path, const EventLog& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_event_log(out, log);
}

EventLog read_event_log(std::istream& in) {
  EventLog log;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty event log", 1);
  const std::string_view header(line);
  const auto digest_at = header.find(kDigestKey);
  if (!header.starts_with(kHeaderPrefix) || digest_at == std::string_view::npos) {
    throw ParseError("missing event log header", 1);
  }
  log.format_version = parse_number<int>(
      header.substr(kHeaderPrefix.size(), digest_at - kHeaderPrefix.size()), 1, "format_version");
  if (log.format_version != kEventLogFormatVersion) {
    throw ParseError(fmt::format("unsupported format version {}", log.format_version), 1);
  }
  log.config_digest = std::string(header.substr(digest_at + kDigestKey.size()));

  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    auto r = parse_trigger_record(line, line_number);
    if (!log.records.empty() && r.trigger_index <= log.records.back().trigger_index) {
      throw ParseError("trigger_index not increasing", line_number);
    }
    log.records.push_back(r);
  }
  return log;
}

EventLog read_event_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_event_log(in);
}

}  // namespace dcsim
