#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vsnit/sequence.hpp"

// JSON-lines persistence. One record per line:
//   {"person_id":..,"date":..,"weekday":1-7,"holiday":0|1,"static":[4 codes],
//    "activities":[{"label":name,"arr":bin,"dep":bin,"mode":code,"dist":miles,"observed":bool}],
//    "removed_positions":[...]}          <- samples only
// A sample stores its complete sequence; the incomplete one is rebuilt by
// deleting removed_positions.
namespace vsnit::io {

std::string sequence_to_line(const DaySequence& seq);
std::string sample_to_line(const RecoverySample& sample);

DaySequence parse_sequence_line(std::string_view line, std::size_t line_no);
// With allow_plain, a record without removed_positions becomes a sample with
// nothing removed.
RecoverySample parse_sample_line(std::string_view line, std::size_t line_no, bool allow_plain = false);

void write_sequences(const std::filesystem::path& path, std::span<const DaySequence> sequences);
void write_samples(const std::filesystem::path& path, std::span<const RecoverySample> samples);

// Blank lines are skipped. A malformed line raises ParseError with its 1-based number.
std::vector<DaySequence> read_sequences(const std::filesystem::path& path);
std::vector<RecoverySample> read_samples(const std::filesystem::path& path, bool allow_plain = false);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace vsnit::io
