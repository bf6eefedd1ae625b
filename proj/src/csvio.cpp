#include "indexlab/csvio.hpp"

#include <cstdio>
#include <fstream>

#include "indexlab/common.hpp"

namespace indexlab::csvio {

namespace {

std::string escape(const std::string& s) {
  bool need = false;
  for (char c : s)
    if (c == ',' || c == '"' || c == '\n' || c == '\r') need = true;
  if (!need) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace

CsvWriter::CsvWriter(std::vector<std::string> header)
    : header_(std::move(header)) {}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  require(cells.size() == header_.size(), ErrorCode::invalid_argument,
          "CSV row width mismatch");
  rows_.push_back(cells);
}

void CsvWriter::add_row(const std::vector<double>& cells) {
  std::vector<std::string> s;
  s.reserve(cells.size());
  for (double v : cells) s.push_back(format(v));
  add_row(s);
}

std::string CsvWriter::format(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string CsvWriter::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += escape(cells[i]);
    }
    out += "\r\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

void CsvWriter::write_file(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::io, "cannot open " + path);
  const std::string body = str();
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
  require(static_cast<bool>(f), ErrorCode::io, "write failed for " + path);
}

}  // namespace indexlab::csvio
