#include "table.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "tubeq/error.hpp"

namespace tubeq::cli {

void ResultTable::add(std::vector<double> row) {
  if (!label_column.empty()) throw IoError("table row needs a label");
  if (row.size() != columns.size()) throw IoError("table row has the wrong number of columns");
  rows.push_back(std::move(row));
}

void ResultTable::add(std::string label, std::vector<double> row) {
  if (label_column.empty()) throw IoError("table has no label column");
  if (row.size() != columns.size()) throw IoError("table row has the wrong number of columns");
  labels.push_back(std::move(label));
  rows.push_back(std::move(row));
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

std::string json_number(double v) { return std::isfinite(v) ? format_number(v) : "null"; }

}  // namespace

std::string render(const ResultTable& t, Format f) {
  std::string out;
  if (f == Format::Csv) {
    const bool lab = !t.label_column.empty();
    out += lab ? t.label_column : "";
    for (size_t i = 0; i < t.columns.size(); ++i) out += (i || lab ? "," : "") + t.columns[i];
    out += "\n";
    out += lab ? "-" : "";
    for (size_t i = 0; i < t.units.size(); ++i) out += (i || lab ? "," : "") + t.units[i];
    out += "\n";
    for (size_t r = 0; r < t.rows.size(); ++r) {
      out += lab ? t.labels[r] : "";
      for (size_t i = 0; i < t.rows[r].size(); ++i)
        out += (i || lab ? "," : "") + format_number(t.rows[r][i]);
      out += "\n";
    }
    return out;
  }
  out += "{\n";
  if (!t.label_column.empty()) {
    out += "  \"label_column\": " + json_string(t.label_column) + ",\n  \"labels\": [";
    for (size_t i = 0; i < t.labels.size(); ++i) out += (i ? ", " : "") + json_string(t.labels[i]);
    out += "],\n";
  }
  out += "  \"columns\": [";
  for (size_t i = 0; i < t.columns.size(); ++i) out += (i ? ", " : "") + json_string(t.columns[i]);
  out += "],\n  \"units\": [";
  for (size_t i = 0; i < t.units.size(); ++i) out += (i ? ", " : "") + json_string(t.units[i]);
  out += "],\n  \"rows\": [";
  for (size_t r = 0; r < t.rows.size(); ++r) {
    out += r ? ",\n    [" : "\n    [";
    for (size_t i = 0; i < t.rows[r].size(); ++i) out += (i ? ", " : "") + json_number(t.rows[r][i]);
    out += "]";
  }
  out += t.rows.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

void write_text(const std::string& path, const std::string& body) {
  std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + p.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing: " + std::strerror(errno));
  out << body;
  out.flush();
  if (!out) throw IoError("write failed for " + path + ": " + std::strerror(errno));
}

std::string emit_table(const ResultTable& t, const std::string& base, Format f) {
  const std::string path = base + (f == Format::Csv ? ".csv" : ".json");
  write_text(path, render(t, f));
  return path;
}

void Summary::set(const std::string& key, SummaryValue v) {
  for (auto& e : entries)
    if (e.first == key) {
      e.second = std::move(v);
      return;
    }
  entries.emplace_back(key, std::move(v));
}

std::string Summary::render() const {
  std::string out = "{";
  for (size_t i = 0; i < entries.size(); ++i) {
    out += i ? ",\n  " : "\n  ";
    out += json_string(entries[i].first) + ": ";
    const auto& v = entries[i].second;
    if (const double* d = std::get_if<double>(&v)) {
      out += json_number(*d);
    } else if (const long long* n = std::get_if<long long>(&v)) {
      out += std::to_string(*n);
    } else if (const bool* b = std::get_if<bool>(&v)) {
      out += *b ? "true" : "false";
    } else {
      out += json_string(std::get<std::string>(v));
    }
  }
  out += entries.empty() ? "}\n" : "\n}\n";
  return out;
}

}  // namespace tubeq::cli
