#include "vsnit/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vsnit/error.hpp"

namespace vsnit::io {

namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

ordered_json sequence_json(const DaySequence& seq) {
  ordered_json j;
  j["person_id"] = seq.person_id;
  j["date"] = seq.date;
  j["weekday"] = seq.weekday;
  j["holiday"] = seq.holiday ? 1 : 0;
  j["static"] = seq.static_codes;
  ordered_json acts = ordered_json::array();
  for (const auto& a : seq.activities) {
    ordered_json r;
    r["label"] = std::string(name_of(a.label));
    r["arr"] = a.arrival;
    r["dep"] = a.departure;
    r["mode"] = a.mode;
    r["dist"] = a.distance;
    r["observed"] = a.observed;
    acts.push_back(std::move(r));
  }
  j["activities"] = std::move(acts);
  return j;
}

template <typename T>
T field(const json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'", line_no);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type", line_no);
  }
}

DaySequence sequence_from_json(const json& j, std::size_t line_no) {
  if (!j.is_object()) throw ParseError("record is not a JSON object", line_no);
  DaySequence seq;
  seq.person_id = field<std::uint64_t>(j, "person_id", line_no);
  seq.date = field<int>(j, "date", line_no);
  seq.weekday = field<int>(j, "weekday", line_no);
  const int holiday = field<int>(j, "holiday", line_no);
  if (holiday != 0 && holiday != 1) throw ParseError("holiday must be 0 or 1", line_no);
  seq.holiday = holiday == 1;
  const auto codes = field<std::vector<int>>(j, "static", line_no);
  if (codes.size() != kStaticCovariates) throw ParseError("static must hold 4 codes", line_no);
  std::copy(codes.begin(), codes.end(), seq.static_codes.begin());
  const auto acts = j.find("activities");
  if (acts == j.end() || !acts->is_array()) throw ParseError("missing array 'activities'", line_no);
  for (const auto& r : *acts) {
    if (!r.is_object()) throw ParseError("activity is not an object", line_no);
    const auto label = activity_from_name(field<std::string>(r, "label", line_no));
    if (!label) throw ParseError("unknown activity label", line_no);
    ActivityRecord rec;
    rec.label = *label;
    rec.arrival = field<int>(r, "arr", line_no);
    rec.departure = field<int>(r, "dep", line_no);
    rec.mode = field<int>(r, "mode", line_no);
    rec.distance = field<double>(r, "dist", line_no);
    rec.observed = field<bool>(r, "observed", line_no);
    seq.activities.push_back(rec);
  }
  try {
    validate(seq);
  } catch (const ConfigError& e) {
    throw ParseError(e.what(), line_no);
  }
  return seq;
}

json parse_json(std::string_view line, std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
  }
}

template <typename Record, typename Parse>
std::vector<Record> read_lines(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::vector<Record> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse(line, line_no));
  }
  return out;
}

template <typename Record, typename Format>
void write_lines(const std::filesystem::path& path, std::span<const Record> records, Format format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& r : records) out << format(r) << '\n';
  if (!out) throw ConfigError("write failed for " + path.string());
}

}  // namespace

std::string sequence_to_line(const DaySequence& seq) { return sequence_json(seq).dump(); }

std::string sample_to_line(const RecoverySample& sample) {
  auto j = sequence_json(sample.complete);
  j["removed_positions"] = sample.removed_positions;
  return j.dump();
}

DaySequence parse_sequence_line(std::string_view line, std::size_t line_no) {
  return sequence_from_json(parse_json(line, line_no), line_no);
}

RecoverySample parse_sample_line(std::string_view line, std::size_t line_no, bool allow_plain) {
  const json j = parse_json(line, line_no);
  DaySequence complete = sequence_from_json(j, line_no);
  std::vector<std::size_t> removed;
  if (j.contains("removed_positions")) {
    removed = field<std::vector<std::size_t>>(j, "removed_positions", line_no);
  } else if (!allow_plain) {
    throw ParseError("missing field 'removed_positions'", line_no);
  }
  try {
    return make_sample(std::move(complete), std::move(removed));
  } catch (const Error& e) {
    throw ParseError(e.what(), line_no);
  }
}

void write_sequences(const std::filesystem::path& path, std::span<const DaySequence> sequences) {
  write_lines(path, sequences, sequence_to_line);
}

void write_samples(const std::filesystem::path& path, std::span<const RecoverySample> samples) {
  write_lines(path, samples, sample_to_line);
}

std::vector<DaySequence> read_sequences(const std::filesystem::path& path) {
  return read_lines<DaySequence>(path, parse_sequence_line);
}

std::vector<RecoverySample> read_samples(const std::filesystem::path& path, bool allow_plain) {
  return read_lines<RecoverySample>(path, [allow_plain](std::string_view line, std::size_t n) {
    return parse_sample_line(line, n, allow_plain);
  });
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace vsnit::io
