#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coldpref/types.hpp"

namespace coldpref {

enum class ColumnKind { numeric, categorical };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  // Exactly one of these is populated, matching `kind`. nullopt marks a missing cell.
  std::vector<std::optional<double>> numbers;
  std::vector<std::optional<std::string>> labels;

  std::size_t size() const { return kind == ColumnKind::numeric ? numbers.size() : labels.size(); }
  bool missing(std::size_t row) const {
    return kind == ColumnKind::numeric ? !numbers[row].has_value() : !labels[row].has_value();
  }
};

// Everything the cleaning pipeline did, in order, for the plain-text report.
struct PrepReport {
  std::vector<std::string> dropped_columns;  // "name: reason"
  std::vector<std::string> encodings;        // "name: one-hot (k levels)" / "name: frequency rank"
  std::vector<std::string> imputations;      // "name: m values -> median 1.5"
  std::size_t dropped_rows = 0;

  std::string to_text() const;
};

struct RawTable {
  std::vector<Column> columns;
  std::string target_column;
  PrepReport report;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  const Column* find(const std::string& name) const;
  Column* find(const std::string& name);
};

struct PreparedDataset {
  Matrix X;  // n x p, standardized
  Vector y;  // true targets; only the oracle and test-set labelling look at these
  std::vector<std::string> feature_names;
  PrepReport report;

  std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t features() const { return static_cast<std::size_t>(X.cols()); }
};

struct PrepOptions {
  std::size_t onehot_max_cardinality = 10;
  double drop_threshold = 0.5;
  std::vector<std::string> drop_columns;  // explicit feature selection
};

// CSV with a header row; empty fields and the literal NA are missing values.
// A column is numeric when every non-missing cell parses as a number.
RawTable read_csv(std::istream& in, const std::string& target_column);

// Removes the named feature columns. Unknown names are an InputError.
RawTable drop_columns(RawTable table, const std::vector<std::string>& names);

RawTable encode_categoricals(RawTable table, std::size_t onehot_max_cardinality);
RawTable impute_missing(RawTable table, double drop_threshold);
PreparedDataset standardize(const RawTable& table);

// drop -> encode -> impute -> standardize.
PreparedDataset prepare(RawTable table, const PrepOptions& options);

// Turns a prepared dataset back into an all-numeric table (for re-standardizing).
RawTable to_table(const PreparedDataset& data);

struct SyntheticOptions {
  std::size_t n = 2000;
  std::size_t p = 10;
  double noise_std = 0.1;
  std::uint64_t seed = 7;
  // Loading of every feature on a shared latent factor. 0 gives i.i.d. columns.
  double factor_loading = 0.7;
};

// X from a one-factor Gaussian model, standardized; y = X beta + noise with beta
// a seeded positive unit vector.
PreparedDataset generate_synthetic(const SyntheticOptions& options);

// Header: feature names then "__target". Values printed round-trip exact.
void write_prepared_csv(std::ostream& out, const PreparedDataset& data);
PreparedDataset read_prepared_csv(std::istream& in);

}  // namespace coldpref
