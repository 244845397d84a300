#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dxfcost/common.hpp"
#include "dxfcost/csv.hpp"
#include "dxfcost/features.hpp"

namespace dxfcost {

struct FeatureTable {
  FeatureSchema schema;
  std::vector<FeatureVector> rows;
};

inline std::vector<std::string> feature_table_header(const FeatureSchema& schema) {
  std::vector<std::string> header = schema.names;
  header.push_back("group");
  header.push_back("cost");
  header.push_back("source_id");
  return header;
}

inline void write_feature_table(const FeatureTable& table, std::ostream& os) {
  write_csv_row(os, feature_table_header(table.schema));
  for (const auto& row : table.rows) {
    if (row.values.size() != table.schema.size())
      throw SchemaError("feature row width does not match schema");
    std::vector<std::string> cells;
    cells.reserve(table.schema.size() + 3);
    for (double v : row.values) cells.push_back(is_missing(v) ? "" : format_double(v));
    cells.push_back(row.group);
    cells.push_back(is_missing(row.cost) ? "" : format_double(row.cost));
    cells.push_back(row.source_id);
    write_csv_row(os, cells);
  }
}

inline void write_feature_table(const FeatureTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  write_feature_table(table, out);
  if (!out) throw IoError("write failed: " + path);
}

// Reads a feature CSV and checks it against the canonical schema: the
// material vocabulary is recovered from the mat_ columns, every other column
// name and position must match exactly, and the three metadata columns must
// close the row. Missing values are empty cells.
inline FeatureTable read_feature_table(std::istream& is, const std::string& what = "feature csv") {
  const CsvTable csv = parse_csv(is);
  if (csv.header.empty()) throw SchemaError(what + ": empty file");
  if (csv.header.size() < 3 || csv.header[csv.header.size() - 3] != "group" ||
      csv.header[csv.header.size() - 2] != "cost" || csv.header.back() != "source_id")
    throw SchemaError(what + ": header must end with group,cost,source_id");

  std::vector<std::string> vocab;
  for (std::size_t i = 0; i + 3 < csv.header.size(); ++i)
    if (csv.header[i].rfind("mat_", 0) == 0) vocab.push_back(csv.header[i].substr(4));

  FeatureTable table;
  table.schema = make_schema(vocab);
  const auto expected = feature_table_header(table.schema);
  if (csv.header != expected) {
    for (std::size_t i = 0; i < std::min(expected.size(), csv.header.size()); ++i)
      if (csv.header[i] != expected[i])
        throw SchemaError(what + ": column " + std::to_string(i + 1) + " is '" + csv.header[i] +
                          "', expected '" + expected[i] + "'");
    throw SchemaError(what + ": header has " + std::to_string(csv.header.size()) +
                      " columns, expected " + std::to_string(expected.size()));
  }

  const std::size_t width = table.schema.size();
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& cells = csv.rows[r];
    if (cells.size() != width + 3)
      throw SchemaError(what + ": row " + std::to_string(r + 2) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(width + 3));
    FeatureVector fv;
    fv.values.reserve(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (cells[c].empty()) {
        fv.values.push_back(kMissing);
        continue;
      }
      double v = 0.0;
      if (!try_parse_double(cells[c], v))
        throw SchemaError(what + ": row " + std::to_string(r + 2) + ", column '" +
                          table.schema.names[c] + "': not a number: " + cells[c]);
      fv.values.push_back(v);
    }
    fv.group = cells[width];
    if (!cells[width + 1].empty()) {
      double cost = 0.0;
      if (!try_parse_double(cells[width + 1], cost))
        throw SchemaError(what + ": row " + std::to_string(r + 2) +
                          ": cost is not a number: " + cells[width + 1]);
      if (cost <= 0.0)
        throw SchemaError(what + ": row " + std::to_string(r + 2) + ": cost must be positive");
      fv.cost = cost;
    }
    fv.source_id = cells[width + 2];
    table.rows.push_back(std::move(fv));
  }
  return table;
}

inline FeatureTable read_feature_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  return read_feature_table(in, path);
}

}  // namespace dxfcost
