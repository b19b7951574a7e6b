#include "chronolens/emit.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "chronolens/errors.hpp"

namespace chronolens {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void CsvTable::add_row(std::vector<double> row) {
  if (row.size() != columns.size())
    throw std::invalid_argument("CsvTable: row width does not match the header");
  rows.push_back(std::move(row));
}

std::string render_csv(const CsvTable& table) {
  std::string out;
  out.reserve(32 * (table.rows.size() + 1));
  for (size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_number(row[c]);
    }
    out += '\n';
  }
  return out;
}

JsonValue& JsonValue::set(std::string key, JsonValue value) {
  if (kind_ != Kind::object) throw std::logic_error("JsonValue::set on a non-object");
  object_.emplace_back(std::move(key), std::move(value));
  return *this;
}

JsonValue& JsonValue::push(JsonValue value) {
  if (kind_ != Kind::array) throw std::logic_error("JsonValue::push on a non-array");
  array_.push_back(std::move(value));
  return *this;
}

namespace {

void write_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (const char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += '"';
}

}  // namespace

void JsonValue::write(std::string& out, int indent) const {
  const std::string pad(2 * indent, ' ');
  const std::string pad_in(2 * (indent + 1), ' ');
  switch (kind_) {
    case Kind::null:
      out += "null";
      break;
    case Kind::boolean:
      out += bool_ ? "true" : "false";
      break;
    case Kind::number:
      out += std::isfinite(number_) ? format_number(number_) : "null";
      break;
    case Kind::string:
      write_escaped(out, string_);
      break;
    case Kind::array:
      if (array_.empty()) {
        out += "[]";
        break;
      }
      out += "[\n";
      for (size_t i = 0; i < array_.size(); ++i) {
        out += pad_in;
        array_[i].write(out, indent + 1);
        if (i + 1 < array_.size()) out += ',';
        out += '\n';
      }
      out += pad + "]";
      break;
    case Kind::object:
      if (object_.empty()) {
        out += "{}";
        break;
      }
      out += "{\n";
      for (size_t i = 0; i < object_.size(); ++i) {
        out += pad_in;
        write_escaped(out, object_[i].first);
        out += ": ";
        object_[i].second.write(out, indent + 1);
        if (i + 1 < object_.size()) out += ',';
        out += '\n';
      }
      out += pad + "}";
      break;
  }
}

std::string JsonValue::dump() const {
  std::string out;
  write(out, 0);
  out += '\n';
  return out;
}

void OutputBundle::add(std::string name, std::string content) {
  files.emplace_back(std::move(name), std::move(content));
}

void OutputBundle::write_to(const std::string& out_dir) const {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError(out_dir + ": cannot create output directory: " + ec.message());
  for (const auto& [name, content] : files) {
    const fs::path target = fs::path(out_dir) / name;
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(target.string() + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ConfigError(target.string() + ": write failed");
  }
}

}  // namespace chronolens
