#include "harvestsim/io_util.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "harvestsim/errors.hpp"

namespace harvestsim {

std::string format_double(double value) {
  char buf[64];
  // Try increasing precision until the text parses back bit-exactly.
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) {
      break;
    }
  }
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

double parse_double(const std::string& field, const std::string& context) {
  errno = 0;
  char* end = nullptr;
  double value = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0' || errno == ERANGE) {
    throw ParseError(context + ": not a number: '" + field + "'");
  }
  return value;
}

long parse_long(const std::string& field, const std::string& context) {
  errno = 0;
  char* end = nullptr;
  long value = std::strtol(field.c_str(), &end, 10);
  if (end == field.c_str() || *end != '\0' || errno == ERANGE) {
    throw ParseError(context + ": not an integer: '" + field + "'");
  }
  return value;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

CsvReader::CsvReader(const std::string& path) : path_(path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open file: " + path);
  }
  std::ostringstream whole;
  whole << in.rdbuf();
  buffer_ = whole.str();
}

bool CsvReader::next(std::string& line) {
  while (pos_ < buffer_.size()) {
    std::size_t eol = buffer_.find('\n', pos_);
    if (eol == std::string::npos) {
      eol = buffer_.size();
    }
    line = buffer_.substr(pos_, eol - pos_);
    pos_ = eol + 1;
    ++line_number_;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty() || line[0] == '#') {
      continue;
    }
    return true;
  }
  return false;
}

}  // namespace harvestsim
