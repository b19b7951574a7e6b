#pragma once

#include <string>
#include <utility>
#include <vector>

namespace chronolens {

// Fixed 12-significant-digit rendering shared by the CSV and JSON emitters so
// that identical runs produce byte-identical files.
std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
};

std::string render_csv(const CsvTable& table);

// Small ordered JSON tree. Object keys keep insertion order and numbers go
// through format_number; non-finite numbers render as null.
class JsonValue {
 public:
  using Array = std::vector<JsonValue>;
  using Object = std::vector<std::pair<std::string, JsonValue>>;

  JsonValue() : kind_(Kind::null) {}
  JsonValue(bool b) : kind_(Kind::boolean), bool_(b) {}
  JsonValue(double v) : kind_(Kind::number), number_(v) {}
  JsonValue(int v) : JsonValue(static_cast<double>(v)) {}
  JsonValue(long v) : JsonValue(static_cast<double>(v)) {}
  JsonValue(const char* s) : kind_(Kind::string), string_(s) {}
  JsonValue(std::string s) : kind_(Kind::string), string_(std::move(s)) {}
  JsonValue(Array a) : kind_(Kind::array), array_(std::move(a)) {}
  JsonValue(Object o) : kind_(Kind::object), object_(std::move(o)) {}

  static JsonValue object() { return JsonValue(Object{}); }
  static JsonValue array() { return JsonValue(Array{}); }

  JsonValue& set(std::string key, JsonValue value);  // object append
  JsonValue& push(JsonValue value);                  // array append

  // Pretty form, two-space indent, trailing newline.
  std::string dump() const;

 private:
  enum class Kind { null, boolean, number, string, array, object };

  void write(std::string& out, int indent) const;

  Kind kind_;
  bool bool_ = false;
  double number_ = 0;
  std::string string_;
  Array array_;
  Object object_;
};

// Deferred file set: commands build every output in memory first, so a run
// that fails part-way leaves no partial files behind.
struct OutputBundle {
  std::vector<std::pair<std::string, std::string>> files;

  void add(std::string name, std::string content);
  void write_to(const std::string& out_dir) const;
};

}  // namespace chronolens
