#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "ccmtool/series.hpp"

namespace ccmtool {

/// Shortest decimal string that parses back to exactly the same double.
/// All persisted numbers go through this, so reports are byte-stable across
/// runs and round-trip without loss.
std::string format_double(double v);

/// Recording CSV: first row is the channel labels, then one row per sample,
/// one column per channel. The sample rate and event onset are not part of
/// the file; callers supply them (CLI flag or config).
void write_recording_csv(const Recording& rec, std::ostream& out);
void write_recording_csv(const Recording& rec, const std::string& path);

/// Parse the CSV format above. Throws MalformedInput on ragged rows,
/// unparseable numbers, or an empty body.
Recording read_recording_csv(std::istream& in, double sample_rate,
                             std::optional<double> event_onset = std::nullopt);
Recording read_recording_csv(const std::string& path, double sample_rate,
                             std::optional<double> event_onset = std::nullopt);

/// Whole-file helpers. read_text_file throws IoError when the file cannot be
/// opened; write_text_file creates parent directories first.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace ccmtool
