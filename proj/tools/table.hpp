#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "config.hpp"

namespace tubeq::cli {

/// Named columns, a units row, numeric rows in insertion order.
struct ResultTable {
  /// optional leading text column; `columns`/`units` exclude it and each row needs a label
  std::string label_column;
  std::vector<std::string> labels;
  std::vector<std::string> columns;
  std::vector<std::string> units;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
  void add(std::string label, std::vector<double> row);
};

/// 17 significant digits, round-trip exact. Non-finite values print as nan/inf (null in JSON).
std::string format_number(double v);

std::string render(const ResultTable& t, Format f);
/// Writes `base` + ".csv" or ".json"; returns the path written.
std::string emit_table(const ResultTable& t, const std::string& base, Format f);

using SummaryValue = std::variant<double, long long, bool, std::string>;

/// Flat key/value record kept in insertion order, written as JSON.
struct Summary {
  std::vector<std::pair<std::string, SummaryValue>> entries;
  void set(const std::string& key, SummaryValue v);
  [[nodiscard]] std::string render() const;
};

void write_text(const std::string& path, const std::string& body);

}  // namespace tubeq::cli
