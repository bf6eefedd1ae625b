#pragma once

#include <string>
#include <vector>

namespace indexlab::csvio {

// RFC-4180 CSV: CRLF line endings, header row, quoting only when needed.
// Numeric cells are formatted with %.12g so identical runs are
// byte-identical.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(const std::vector<std::string>& cells);
  void add_row(const std::vector<double>& cells);
  std::string str() const;
  void write_file(const std::string& path) const;

  static std::string format(double v);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace indexlab::csvio
