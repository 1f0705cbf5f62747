#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace textimpact::textio {

// Reads a whole file; throws Error(MissingArtifact, "MissingFile") when absent.
std::string read_file(const std::filesystem::path& path);

// Writes via a temporary sibling file and rename, so readers never observe a
// partially written artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string_view trim(std::string_view text);

// Splits text into lines, accepting LF or CRLF endings.
std::vector<std::string> split_lines(std::string_view text);

// One CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

// Quotes a field only if it needs it.
std::string csv_escape(std::string_view field);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

// Fixed-point text with `digits` decimals, locale independent.
std::string format_fixed(double value, int digits);

}  // namespace textimpact::textio
