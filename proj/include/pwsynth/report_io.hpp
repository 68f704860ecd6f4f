#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pwsynth {

// Fixed-format float for reports: 17 significant digits, "null" for
// non-finite values so JSON stays parseable.
std::string fmt17(double x);

// Streaming JSON writer with caller-controlled key order. No timestamps, no
// locale dependence: identical call sequences produce identical bytes.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& k);

  JsonWriter& value(double v);
  JsonWriter& value(std::int64_t v);
  JsonWriter& value(int v);
  JsonWriter& value(std::size_t v);
  JsonWriter& value(bool v);
  JsonWriter& value(const char* v);
  JsonWriter& value(const std::string& v);
  JsonWriter& value_null();

  JsonWriter& field(const std::string& k, double v) { return key(k).value(v); }
  JsonWriter& field(const std::string& k, std::int64_t v) { return key(k).value(v); }
  JsonWriter& field(const std::string& k, int v) { return key(k).value(v); }
  JsonWriter& field(const std::string& k, std::size_t v) { return key(k).value(v); }
  JsonWriter& field(const std::string& k, bool v) { return key(k).value(v); }
  JsonWriter& field(const std::string& k, const char* v) { return key(k).value(v); }
  JsonWriter& field(const std::string& k, const std::string& v) { return key(k).value(v); }
  JsonWriter& field(const std::string& k, const std::vector<double>& v);
  JsonWriter& field(const std::string& k, const std::vector<int>& v);
  JsonWriter& field(const std::string& k, const std::vector<std::int64_t>& v);
  JsonWriter& field(const std::string& k, const std::vector<bool>& v);

  const std::string& str() const { return out_; }

 private:
  void comma();
  std::string out_;
  std::vector<bool> first_;  // per nesting level
  bool pending_key_ = false;
};

// Row-oriented CSV with a fixed header; floats via fmt17 (non-finite values
// render as "nan"/"inf" literals since CSV has no null).
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& header);
  void begin_row();
  void cell(double v);
  void cell(std::int64_t v);
  void cell(int v);
  void cell(const std::string& v);
  const std::string& str();

 private:
  std::string out_;
  bool row_open_ = false;
  bool row_first_ = true;
};

// Writes content to path via a temporary file and rename; creates parent
// directories as needed.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace pwsynth
