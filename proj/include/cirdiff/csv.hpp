#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace cirdiff::csv {

/// Shortest decimal text that parses back to the same double.
std::string format(double v);

/// Splits on commas and trims surrounding whitespace from each field.
std::vector<std::string> split(std::string_view line);

/// Strict decimal parse of a whole field; throws parse with `where` in the message.
double parse_double(std::string_view field, const std::string& where);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

/// Reads the next line that is not blank; strips a trailing '\r' and a UTF-8 BOM
/// on the first line. Returns false at end of input.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no);

}  // namespace cirdiff::csv
