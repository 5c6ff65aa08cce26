#include "puprior/csv.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "puprior/errors.hpp"

namespace puprior {

namespace {

// Splits one line; supports double-quoted fields with "" escapes.
std::vector<std::string> split_fields(const std::string& line,
                                      std::size_t line_no) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"' && current.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  if (quoted) throw ParseError("unterminated quote", line_no);
  fields.push_back(current);
  return fields;
}

std::optional<double> parse_number(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const char* begin = text.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end != begin + text.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace

CsvData load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream file(path);
  if (!file) throw InvalidInputError("cannot open '" + path + "'");

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (line.empty() && rows.empty() && header.empty()) continue;
    auto fields = split_fields(line, line_no);
    if (line_no == 1 && schema.has_header) {
      header = std::move(fields);
      width = header.size();
      continue;
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " columns, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw InvalidInputError("'" + path + "' has no data rows");

  if (schema.label_column >= static_cast<int>(width)) {
    throw InvalidInputError("label column out of range");
  }
  std::vector<int> feature_cols = schema.feature_columns;
  if (feature_cols.empty()) {
    for (int c = 0; c < static_cast<int>(width); ++c) {
      if (c != schema.label_column) feature_cols.push_back(c);
    }
  }
  for (int c : feature_cols) {
    if (c < 0 || c >= static_cast<int>(width)) {
      throw InvalidInputError("feature column " + std::to_string(c) +
                              " out of range");
    }
  }

  const std::size_t n = rows.size();
  const std::size_t data_line = schema.has_header ? 2 : 1;

  // Pass 1: decide numeric vs. categorical per feature column.
  std::vector<bool> numeric(feature_cols.size(), true);
  for (std::size_t j = 0; j < feature_cols.size(); ++j) {
    for (const auto& row : rows) {
      if (!parse_number(row[static_cast<std::size_t>(feature_cols[j])])) {
        numeric[j] = false;
        break;
      }
    }
  }

  // Pass 2: layout. Categorical columns expand one binary column per value.
  std::vector<std::map<std::string, int>> categories(feature_cols.size());
  std::vector<int> base_offset(feature_cols.size());
  int total = 0;
  for (std::size_t j = 0; j < feature_cols.size(); ++j) {
    base_offset[j] = total;
    if (numeric[j]) {
      ++total;
    } else {
      auto& cats = categories[j];
      for (const auto& row : rows) {
        const auto& value = row[static_cast<std::size_t>(feature_cols[j])];
        if (!cats.count(value)) {
          const int next = static_cast<int>(cats.size());
          cats[value] = next;
        }
      }
      total += static_cast<int>(cats.size());
    }
  }

  CsvData out;
  out.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), total);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      const auto& value = rows[i][static_cast<std::size_t>(feature_cols[j])];
      if (numeric[j]) {
        const auto parsed = parse_number(value);
        if (!parsed) {
          throw ParseError("non-numeric value '" + value + "'",
                           data_line + i);
        }
        out.features(static_cast<Eigen::Index>(i), base_offset[j]) = *parsed;
      } else {
        const int slot = categories[j].at(value);
        out.features(static_cast<Eigen::Index>(i), base_offset[j] + slot) = 1.0;
      }
    }
  }

  auto column_name = [&](int c) {
    if (!header.empty()) return header[static_cast<std::size_t>(c)];
    return "col" + std::to_string(c);
  };
  for (std::size_t j = 0; j < feature_cols.size(); ++j) {
    if (numeric[j]) {
      out.feature_names.push_back(column_name(feature_cols[j]));
    } else {
      std::vector<std::string> ordered(categories[j].size());
      for (const auto& [cat, slot] : categories[j]) {
        ordered[static_cast<std::size_t>(slot)] = cat;
      }
      for (const auto& cat : ordered) {
        out.feature_names.push_back(column_name(feature_cols[j]) + "=" + cat);
      }
    }
  }

  if (schema.label_column >= 0) {
    const auto col = static_cast<std::size_t>(schema.label_column);
    out.labels.resize(n);
    if (schema.binarize_at_mean) {
      double mean = 0.0;
      std::vector<double> values(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto parsed = parse_number(rows[i][col]);
        if (!parsed) {
          throw ParseError("non-numeric label '" + rows[i][col] + "'",
                           data_line + i);
        }
        values[i] = *parsed;
        mean += *parsed;
      }
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) out.labels[i] = values[i] > mean;
    } else if (!schema.positive_label.empty()) {
      for (std::size_t i = 0; i < n; ++i) {
        out.labels[i] = rows[i][col] == schema.positive_label;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const auto parsed = parse_number(rows[i][col]);
        if (!parsed || (*parsed != 0.0 && *parsed != 1.0)) {
          throw ParseError("label '" + rows[i][col] + "' is not 0/1",
                           data_line + i);
        }
        out.labels[i] = static_cast<int>(*parsed);
      }
    }
  }
  return out;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream file(path);
  if (!file) throw InvalidInputError("cannot write '" + path + "'");
  std::ostringstream buffer;
  buffer.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) buffer << ',';
      buffer << m(i, j);
    }
    buffer << '\n';
  }
  file << buffer.str();
}

}  // namespace puprior
