#include "wardboost/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace wardboost {

namespace {

[[noreturn]] void line_error(const std::string& path, std::size_t line, const std::string& what) {
  throw std::runtime_error(path + " line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r') {
    fields.back().pop_back();
  }
  return fields;
}

double parse_double_field(const std::string& text, const std::string& path, std::size_t line,
                          const char* what) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    line_error(path, line, std::string("cannot parse ") + what + " '" + text + "'");
  }
  return v;
}

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path + " for reading");
  return in;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

void expect_header(std::ifstream& in, const std::string& path, const std::string& expected) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) {
    throw std::runtime_error(path + ": expected header '" + expected + "', got '" + line + "'");
  }
}

constexpr const char* kEventsHeader = "encounter_id,patient_id,time,vital,value";
constexpr const char* kEncountersHeader =
    "encounter_id,patient_id,age_years,transferred,transfer_time";
constexpr const char* kSnapshotsHeader =
    "hr,o2,rr,temp,dbp,sbp,age,pp,map,si,label,encounter_id,patient_id";

}  // namespace

std::string format_double(double v) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

std::vector<VitalEvent> load_events_csv(const std::string& path) {
  auto in = open_for_read(path);
  expect_header(in, path, kEventsHeader);
  std::vector<VitalEvent> events;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (fields.size() != 5) line_error(path, line_no, "expected 5 fields");
    VitalEvent ev;
    ev.encounter_id = fields[0];
    ev.patient_id = fields[1];
    try {
      ev.time = parse_iso8601_utc(fields[2]);
    } catch (const std::invalid_argument& e) {
      line_error(path, line_no, e.what());
    }
    const auto vital = parse_vital(fields[3]);
    if (!vital) line_error(path, line_no, "unknown vital '" + fields[3] + "'");
    ev.vital = *vital;
    ev.value = parse_double_field(fields[4], path, line_no, "value");
    if (!std::isfinite(ev.value)) line_error(path, line_no, "value is not finite");
    if (ev.vital == Vital::O2 && (ev.value < 0.0 || ev.value > 100.0)) {
      line_error(path, line_no, "O2 saturation outside [0, 100]");
    }
    events.push_back(std::move(ev));
  }
  return events;
}

void write_events_csv(const std::string& path, std::span<const VitalEvent> events) {
  auto out = open_for_write(path);
  out << kEventsHeader << '\n';
  for (const auto& ev : events) {
    out << ev.encounter_id << ',' << ev.patient_id << ',' << format_iso8601_utc(ev.time) << ','
        << vital_name(ev.vital) << ',' << format_double(ev.value) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Encounters
// ---------------------------------------------------------------------------

std::vector<Encounter> load_encounters_csv(const std::string& path) {
  auto in = open_for_read(path);
  expect_header(in, path, kEncountersHeader);
  std::vector<Encounter> encounters;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (fields.size() != 5) line_error(path, line_no, "expected 5 fields");
    Encounter enc;
    enc.encounter_id = fields[0];
    enc.patient_id = fields[1];
    enc.age_years = parse_double_field(fields[2], path, line_no, "age_years");
    if (enc.age_years < kMinAgeYears || enc.age_years >= kMaxAgeYears) {
      line_error(path, line_no, "age_years outside [1/12, 20)");
    }
    if (fields[3] == "1" || fields[3] == "true") {
      enc.transferred = true;
    } else if (fields[3] == "0" || fields[3] == "false") {
      enc.transferred = false;
    } else {
      line_error(path, line_no, "transferred must be 0/1/true/false");
    }
    if (enc.transferred) {
      if (fields[4].empty()) line_error(path, line_no, "transferred encounter lacks transfer_time");
      try {
        enc.transfer_time = parse_iso8601_utc(fields[4]);
      } catch (const std::invalid_argument& e) {
        line_error(path, line_no, e.what());
      }
    } else if (!fields[4].empty()) {
      line_error(path, line_no, "non-transferred encounter has a transfer_time");
    }
    encounters.push_back(std::move(enc));
  }
  return encounters;
}

void write_encounters_csv(const std::string& path, std::span<const Encounter> encounters) {
  auto out = open_for_write(path);
  out << kEncountersHeader << '\n';
  for (const auto& enc : encounters) {
    out << enc.encounter_id << ',' << enc.patient_id << ',' << format_double(enc.age_years)
        << ',' << (enc.transferred ? '1' : '0') << ','
        << (enc.transfer_time ? format_iso8601_utc(*enc.transfer_time) : std::string()) << '\n';
  }
}

std::vector<Encounter> assemble_encounters(std::vector<Encounter> encounters,
                                           std::span<const VitalEvent> events) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(encounters.size());
  for (std::size_t i = 0; i < encounters.size(); ++i) {
    if (!index.emplace(encounters[i].encounter_id, i).second) {
      throw std::runtime_error("duplicate encounter_id " + encounters[i].encounter_id);
    }
  }
  for (const auto& ev : events) {
    const auto it = index.find(ev.encounter_id);
    if (it == index.end()) {
      throw std::runtime_error("event references unknown encounter_id " + ev.encounter_id);
    }
    encounters[it->second].events.push_back(ev);
  }
  for (auto& enc : encounters) {
    std::stable_sort(enc.events.begin(), enc.events.end(),
                     [](const VitalEvent& a, const VitalEvent& b) { return a.time < b.time; });
  }
  return encounters;
}

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

std::vector<FeatureSnapshot> load_snapshots_csv(const std::string& path) {
  auto in = open_for_read(path);
  expect_header(in, path, kSnapshotsHeader);
  std::vector<FeatureSnapshot> snapshots;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (fields.size() != kFeatureCount + 3) {
      line_error(path, line_no, "expected " + std::to_string(kFeatureCount + 3) + " fields");
    }
    FeatureSnapshot snap;
    for (int f = 0; f < kFeatureCount; ++f) {
      if (fields[f].empty()) continue;
      snap.values[f] = parse_double_field(fields[f], path, line_no, feature_name(f));
    }
    if (!snap.values[kFeatAge]) line_error(path, line_no, "age is required");
    const std::string& label = fields[kFeatureCount];
    if (label == "1" || label == "+1") {
      snap.label = +1;
    } else if (label == "-1") {
      snap.label = -1;
    } else {
      line_error(path, line_no, "label must be +1 or -1, got '" + label + "'");
    }
    snap.encounter_id = fields[kFeatureCount + 1];
    snap.patient_id = fields[kFeatureCount + 2];
    snapshots.push_back(std::move(snap));
  }
  return snapshots;
}

void write_snapshots_csv(const std::string& path, std::span<const FeatureSnapshot> snapshots) {
  auto out = open_for_write(path);
  out << kSnapshotsHeader << '\n';
  for (const auto& snap : snapshots) {
    for (int f = 0; f < kFeatureCount; ++f) {
      if (snap.values[f]) out << format_double(*snap.values[f]);
      out << ',';
    }
    out << snap.label << ',' << snap.encounter_id << ',' << snap.patient_id << '\n';
  }
}

}  // namespace wardboost
