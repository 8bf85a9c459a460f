#include "sqb/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace sqb::csv {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string escape_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

Writer::Writer(const std::string& path, std::vector<std::string> header)
    : path_(path), width_(header.size()), out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
  write_row(header);
}

void Writer::write_row(const std::vector<std::string>& row) {
  if (row.size() != width_) {
    throw std::invalid_argument("csv: row width " + std::to_string(row.size()) +
                                " does not match schema width " + std::to_string(width_) +
                                " in '" + path_ + "'");
  }
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out_ << ',';
    out_ << escape_field(row[i]);
  }
  out_ << "\r\n";
  if (!out_) throw std::runtime_error("csv: write failed on '" + path_ + "'");
}

void Writer::close() {
  if (out_.is_open()) {
    out_.close();
    if (!out_) throw std::runtime_error("csv: close failed on '" + path_ + "'");
  }
}

Writer::~Writer() {
  if (out_.is_open()) out_.close();
}

}  // namespace sqb::csv
