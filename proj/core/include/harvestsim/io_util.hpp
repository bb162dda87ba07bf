#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace harvestsim {

// Shortest decimal form that round-trips the double exactly.
std::string format_double(double value);

std::vector<std::string> split_csv_line(const std::string& line);

// Numeric field parsers; `context` names the file/line for error messages.
double parse_double(const std::string& field, const std::string& context);
long parse_long(const std::string& field, const std::string& context);

std::uint64_t fnv1a64(std::string_view data);

// Reads lines, tracking 1-based physical line numbers and skipping '#'
// comment lines and blank lines.
class CsvReader {
 public:
  explicit CsvReader(const std::string& path);

  // Next data line, or false at EOF.
  bool next(std::string& line);
  int line_number() const { return line_number_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::string buffer_;
  std::size_t pos_ = 0;
  int line_number_ = 0;
};

}  // namespace harvestsim
