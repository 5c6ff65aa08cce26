#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace puprior {

// How to interpret a delimited file. Columns are zero-based positions in the
// file. With feature_columns empty, every column except the label is a
// feature. Categorical feature columns (any value that does not parse as a
// number) are expanded into one binary column per category, in order of first
// appearance; previously unseen categories simply open a new column.
struct CsvSchema {
  bool has_header = false;
  std::vector<int> feature_columns;  // empty: all but the label column
  int label_column = -1;             // -1: file has no labels
  std::string positive_label;       // label equals this string -> 1
  bool binarize_at_mean = false;    // numeric label thresholded at its mean
};

struct CsvData {
  Eigen::MatrixXd features;               // n x d after one-hot expansion
  std::vector<int> labels;                // empty when label_column == -1
  std::vector<std::string> feature_names; // expanded column names
};

CsvData load_csv(const std::string& path, const CsvSchema& schema = {});

// Writes a plain numeric matrix, one row per line.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);

}  // namespace puprior
