#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvap {

// Parse/format helpers for the toolkit's CSV surfaces. All files are UTF-8
// with LF line endings and contain no quoted fields; real numbers are
// written with 6 significant digits.

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_csv_line(const std::string& line);

// Strict numeric parsing; `where` names the file/line for error messages.
double parse_double(const std::string& field, const std::string& where);
std::int64_t parse_int(const std::string& field, const std::string& where);

// %.6g formatting used for every real number written to CSV.
std::string format_real(double v);

// Reads all lines of a text file, stripping a trailing '\r' if present.
// Throws ParseError naming the path if the file cannot be opened.
std::vector<std::string> read_lines(const std::string& path);

// Writes content atomically enough for our purposes; throws on I/O failure
// naming the offending path.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace mvap
