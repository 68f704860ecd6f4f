#include "pwsynth/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace pwsynth {

std::string fmt17(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

void JsonWriter::comma() {
  if (pending_key_) {
    pending_key_ = false;
    return;
  }
  if (!first_.empty()) {
    if (!first_.back()) out_ += ',';
    first_.back() = false;
  }
}

JsonWriter& JsonWriter::begin_object() {
  comma();
  out_ += '{';
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  out_ += '}';
  first_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  comma();
  out_ += '[';
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  out_ += ']';
  first_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::key(const std::string& k) {
  comma();
  out_ += '"';
  out_ += k;
  out_ += "\":";
  pending_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  comma();
  out_ += fmt17(v);
  return *this;
}

JsonWriter& JsonWriter::value(std::int64_t v) {
  comma();
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
  out_ += buf;
  return *this;
}

JsonWriter& JsonWriter::value(int v) { return value(static_cast<std::int64_t>(v)); }
JsonWriter& JsonWriter::value(std::size_t v) { return value(static_cast<std::int64_t>(v)); }

JsonWriter& JsonWriter::value(bool v) {
  comma();
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::value(const char* v) { return value(std::string(v)); }

JsonWriter& JsonWriter::value(const std::string& v) {
  comma();
  out_ += '"';
  for (char c : v) {
    switch (c) {
      case '"': out_ += "\\\""; break;
      case '\\': out_ += "\\\\"; break;
      case '\n': out_ += "\\n"; break;
      case '\t': out_ += "\\t"; break;
      case '\r': out_ += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out_ += buf;
        } else {
          out_ += c;
        }
    }
  }
  out_ += '"';
  return *this;
}

JsonWriter& JsonWriter::value_null() {
  comma();
  out_ += "null";
  return *this;
}

JsonWriter& JsonWriter::field(const std::string& k, const std::vector<double>& v) {
  key(k).begin_array();
  for (double x : v) value(x);
  return end_array();
}

JsonWriter& JsonWriter::field(const std::string& k, const std::vector<int>& v) {
  key(k).begin_array();
  for (int x : v) value(x);
  return end_array();
}

JsonWriter& JsonWriter::field(const std::string& k, const std::vector<std::int64_t>& v) {
  key(k).begin_array();
  for (std::int64_t x : v) value(x);
  return end_array();
}

JsonWriter& JsonWriter::field(const std::string& k, const std::vector<bool>& v) {
  key(k).begin_array();
  for (bool x : v) value(x);
  return end_array();
}

CsvWriter::CsvWriter(const std::string& header) {
  out_ = header;
  out_ += '\n';
}

void CsvWriter::begin_row() {
  if (row_open_) out_ += '\n';
  row_open_ = true;
  row_first_ = true;
}

void CsvWriter::cell(double v) {
  if (!row_first_) out_ += ',';
  row_first_ = false;
  if (std::isnan(v))
    out_ += "nan";
  else if (std::isinf(v))
    out_ += v > 0 ? "inf" : "-inf";
  else
    out_ += fmt17(v);
}

void CsvWriter::cell(std::int64_t v) {
  if (!row_first_) out_ += ',';
  row_first_ = false;
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
  out_ += buf;
}

void CsvWriter::cell(int v) { cell(static_cast<std::int64_t>(v)); }

void CsvWriter::cell(const std::string& v) {
  if (!row_first_) out_ += ',';
  row_first_ = false;
  out_ += v;
}

const std::string& CsvWriter::str() {
  if (row_open_) {
    out_ += '\n';
    row_open_ = false;
  }
  return out_;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("write_file_atomic: cannot open " + tmp.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write_file_atomic: short write to " + tmp.string());
  }
  fs::rename(tmp, p);
}

}  // namespace pwsynth
