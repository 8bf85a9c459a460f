#ifndef SQB_CSV_HPP
#define SQB_CSV_HPP

#include <fstream>
#include <string>
#include <vector>

namespace sqb::csv {

// 17 significant digits: parses back to the bit-identical double.
std::string format_double(double v);

// RFC-4180 field quoting (only when needed).
std::string escape_field(const std::string& s);

// Header-checked CSV writer. Rows whose width differs from the header are
// rejected; IO failures surface with the path attached.
class Writer {
 public:
  Writer(const std::string& path, std::vector<std::string> header);
  void write_row(const std::vector<std::string>& row);
  void close();
  ~Writer();

  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

 private:
  std::string path_;
  std::size_t width_;
  std::ofstream out_;
};

}  // namespace sqb::csv

#endif  // SQB_CSV_HPP
