#include "coldpref/tabular_prep.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "coldpref/csv.hpp"
#include "coldpref/errors.hpp"
#include "coldpref/rng.hpp"

namespace coldpref {

namespace {

constexpr double kZeroVarianceFloor = 1e-12;
constexpr std::size_t kMinRows = 3;
constexpr const char* kTargetHeader = "__target";

bool is_missing_token(std::string_view cell) { return cell.empty() || cell == "NA"; }

std::string quote_if_needed(const std::string& name) {
  if (name.find_first_of(",\"") == std::string::npos) return name;
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

Column keep_rows(const Column& column, const std::vector<bool>& keep) {
  Column out;
  out.name = column.name;
  out.kind = column.kind;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (!keep[i]) continue;
    if (column.kind == ColumnKind::numeric) {
      out.numbers.push_back(column.numbers[i]);
    } else {
      out.labels.push_back(column.labels[i]);
    }
  }
  return out;
}

std::size_t feature_count(const RawTable& table) {
  return static_cast<std::size_t>(
      std::count_if(table.columns.begin(), table.columns.end(),
                    [&](const Column& c) { return c.name != table.target_column; }));
}

}  // namespace

std::string PrepReport::to_text() const {
  std::ostringstream out;
  out << "dropped rows (missing target): " << dropped_rows << "\n";
  out << "dropped columns: " << dropped_columns.size() << "\n";
  for (const auto& line : dropped_columns) out << "  " << line << "\n";
  out << "encodings: " << encodings.size() << "\n";
  for (const auto& line : encodings) out << "  " << line << "\n";
  out << "imputations: " << imputations.size() << "\n";
  for (const auto& line : imputations) out << "  " << line << "\n";
  return out.str();
}

const Column* RawTable::find(const std::string& name) const {
  for (const auto& column : columns) {
    if (column.name == name) return &column;
  }
  return nullptr;
}

Column* RawTable::find(const std::string& name) {
  for (auto& column : columns) {
    if (column.name == name) return &column;
  }
  return nullptr;
}

RawTable read_csv(std::istream& in, const std::string& target_column) {
  std::string line;
  if (!csv::next_line(in, line)) throw InputError("input is empty: no header row");

  std::vector<std::string> header = csv::split_line(line);
  for (auto& name : header) name = std::string(csv::trim(name));
  if (header.size() < 2) {
    throw InputError("need at least two columns (one feature plus the target), found " +
                     std::to_string(header.size()));
  }
  if (std::find(header.begin(), header.end(), target_column) == header.end()) {
    throw InputError("target column '" + target_column + "' not found in header");
  }
  if (std::set<std::string>(header.begin(), header.end()).size() != header.size()) {
    throw InputError("duplicate column names in header");
  }

  std::vector<std::vector<std::optional<std::string>>> cells(header.size());
  std::size_t line_number = 1;
  while (csv::next_line(in, line)) {
    ++line_number;
    auto fields = csv::split_line(line);
    if (fields.size() != header.size()) {
      throw InputError("line " + std::to_string(line_number) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto cell = csv::trim(fields[c]);
      if (is_missing_token(cell)) {
        cells[c].emplace_back(std::nullopt);
      } else {
        cells[c].emplace_back(std::string(cell));
      }
    }
  }
  if (line_number == 1) throw InputError("input has a header but no data rows");

  RawTable table;
  table.target_column = target_column;
  for (std::size_t c = 0; c < header.size(); ++c) {
    Column column;
    column.name = header[c];
    std::vector<std::optional<double>> parsed;
    parsed.reserve(cells[c].size());
    bool numeric = true;
    for (const auto& cell : cells[c]) {
      if (!cell) {
        parsed.emplace_back(std::nullopt);
        continue;
      }
      auto value = csv::parse_double(*cell);
      if (!value) {
        numeric = false;
        break;
      }
      // NaN and infinities count as missing measurements.
      parsed.emplace_back(std::isfinite(*value) ? value : std::nullopt);
    }
    if (numeric) {
      column.kind = ColumnKind::numeric;
      column.numbers = std::move(parsed);
    } else {
      column.kind = ColumnKind::categorical;
      column.labels = std::move(cells[c]);
    }
    if (column.name == target_column && column.kind != ColumnKind::numeric) {
      throw InputError("target column '" + target_column + "' is not numeric");
    }
    table.columns.push_back(std::move(column));
  }
  return table;
}

RawTable drop_columns(RawTable table, const std::vector<std::string>& names) {
  for (const auto& name : names) {
    if (name == table.target_column) throw InputError("cannot drop the target column '" + name + "'");
    auto it = std::find_if(table.columns.begin(), table.columns.end(),
                           [&](const Column& c) { return c.name == name; });
    if (it == table.columns.end()) throw InputError("drop list names unknown column '" + name + "'");
    table.columns.erase(it);
    table.report.dropped_columns.push_back(name + ": listed in drop configuration");
  }
  return table;
}

RawTable encode_categoricals(RawTable table, std::size_t onehot_max_cardinality) {
  if (onehot_max_cardinality < 2) throw InputError("onehot_max_cardinality must be at least 2");

  std::vector<Column> out;
  for (auto& column : table.columns) {
    if (column.kind == ColumnKind::numeric || column.name == table.target_column) {
      out.push_back(std::move(column));
      continue;
    }
    std::map<std::string, std::size_t> counts;
    for (const auto& cell : column.labels) {
      if (cell) ++counts[*cell];
    }
    if (counts.size() <= 1) {
      table.report.dropped_columns.push_back(column.name + ": single distinct value");
      continue;
    }
    const std::size_t rows = column.labels.size();
    if (counts.size() <= onehot_max_cardinality) {
      // std::map iterates levels in lexicographic order.
      for (const auto& [level, count] : counts) {
        Column binary;
        binary.name = column.name + "=" + level;
        binary.numbers.reserve(rows);
        for (const auto& cell : column.labels) {
          if (!cell) {
            binary.numbers.emplace_back(std::nullopt);
          } else {
            binary.numbers.emplace_back(*cell == level ? 1.0 : 0.0);
          }
        }
        out.push_back(std::move(binary));
      }
      table.report.encodings.push_back(column.name + ": one-hot (" + std::to_string(counts.size()) +
                                       " levels)");
    } else {
      std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
      std::stable_sort(ranked.begin(), ranked.end(),
                       [](const auto& a, const auto& b) { return a.second > b.second; });
      std::map<std::string, double> rank_of;
      for (std::size_t r = 0; r < ranked.size(); ++r) rank_of[ranked[r].first] = static_cast<double>(r);

      Column ranked_column;
      ranked_column.name = column.name;
      ranked_column.numbers.reserve(rows);
      for (const auto& cell : column.labels) {
        if (!cell) {
          ranked_column.numbers.emplace_back(std::nullopt);
        } else {
          ranked_column.numbers.emplace_back(rank_of.at(*cell));
        }
      }
      out.push_back(std::move(ranked_column));
      table.report.encodings.push_back(column.name + ": frequency rank (" +
                                       std::to_string(counts.size()) + " levels)");
    }
  }
  table.columns = std::move(out);
  return table;
}

RawTable impute_missing(RawTable table, double drop_threshold) {
  if (!(drop_threshold >= 0.0 && drop_threshold <= 1.0)) {
    throw InputError("drop_threshold must lie in [0, 1]");
  }
  const Column* target = table.find(table.target_column);
  if (target == nullptr) throw InputError("target column '" + table.target_column + "' missing");

  std::vector<bool> keep(table.rows(), true);
  std::size_t dropped_rows = 0;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (target->missing(i)) {
      keep[i] = false;
      ++dropped_rows;
    }
  }
  if (dropped_rows > 0) {
    for (auto& column : table.columns) column = keep_rows(column, keep);
    table.report.dropped_rows += dropped_rows;
  }

  const std::size_t rows = table.rows();
  std::vector<Column> out;
  for (auto& column : table.columns) {
    if (column.name == table.target_column) {
      out.push_back(std::move(column));
      continue;
    }
    std::size_t missing = 0;
    for (std::size_t i = 0; i < rows; ++i) missing += column.missing(i) ? 1 : 0;
    const double fraction = rows == 0 ? 1.0 : static_cast<double>(missing) / static_cast<double>(rows);
    if (fraction > drop_threshold || missing == rows) {
      table.report.dropped_columns.push_back(column.name + ": " + csv::format_fixed(100.0 * fraction, 1) +
                                             "% missing");
      continue;
    }
    if (missing > 0) {
      if (column.kind == ColumnKind::numeric) {
        std::vector<double> present;
        for (const auto& v : column.numbers) {
          if (v) present.push_back(*v);
        }
        const double fill = median_of(std::move(present));
        for (auto& v : column.numbers) {
          if (!v) v = fill;
        }
        table.report.imputations.push_back(column.name + ": " + std::to_string(missing) +
                                           " values -> median " + csv::format_double(fill));
      } else {
        std::map<std::string, std::size_t> counts;
        for (const auto& v : column.labels) {
          if (v) ++counts[*v];
        }
        // Highest count wins; map order makes ties go to the smallest level.
        auto mode = std::max_element(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
          return a.second < b.second;
        });
        for (auto& v : column.labels) {
          if (!v) v = mode->first;
        }
        table.report.imputations.push_back(column.name + ": " + std::to_string(missing) +
                                           " values -> mode '" + mode->first + "'");
      }
    }
    out.push_back(std::move(column));
  }
  table.columns = std::move(out);
  if (feature_count(table) == 0) throw InputError("no usable features");
  return table;
}

PreparedDataset standardize(const RawTable& table) {
  const Column* target = table.find(table.target_column);
  if (target == nullptr) throw InputError("target column '" + table.target_column + "' missing");
  const std::size_t n = table.rows();
  if (n < kMinRows) {
    throw InputError("dataset too small: " + std::to_string(n) + " rows, need at least " +
                     std::to_string(kMinRows));
  }

  PreparedDataset data;
  data.report = table.report;
  std::vector<std::vector<double>> kept;
  for (const auto& column : table.columns) {
    if (column.name == table.target_column) continue;
    if (column.kind != ColumnKind::numeric) {
      throw InputError("column '" + column.name + "' is still categorical; encode before standardizing");
    }
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!column.numbers[i]) throw InputError("column '" + column.name + "' has missing values");
      values[i] = *column.numbers[i];
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double variance = 0.0;
    for (double v : values) variance += (v - mean) * (v - mean);
    variance /= static_cast<double>(n);
    const double sd = std::sqrt(variance);
    if (sd < kZeroVarianceFloor) {
      data.report.dropped_columns.push_back(column.name + ": zero variance");
      continue;
    }
    for (double& v : values) v = (v - mean) / sd;
    kept.push_back(std::move(values));
    data.feature_names.push_back(column.name);
  }
  if (kept.empty()) throw InputError("no usable features");

  data.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      data.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kept[j][i];
    }
  }
  data.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!target->numbers[i]) throw InputError("target has missing values");
    data.y(static_cast<Eigen::Index>(i)) = *target->numbers[i];
  }
  return data;
}

PreparedDataset prepare(RawTable table, const PrepOptions& options) {
  table = drop_columns(std::move(table), options.drop_columns);
  table = encode_categoricals(std::move(table), options.onehot_max_cardinality);
  table = impute_missing(std::move(table), options.drop_threshold);
  return standardize(table);
}

RawTable to_table(const PreparedDataset& data) {
  RawTable table;
  table.target_column = kTargetHeader;
  table.report = data.report;
  const auto n = data.X.rows();
  for (Eigen::Index j = 0; j < data.X.cols(); ++j) {
    Column column;
    column.name = data.feature_names[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < n; ++i) column.numbers.emplace_back(data.X(i, j));
    table.columns.push_back(std::move(column));
  }
  Column target;
  target.name = kTargetHeader;
  for (Eigen::Index i = 0; i < n; ++i) target.numbers.emplace_back(data.y(i));
  table.columns.push_back(std::move(target));
  return table;
}

PreparedDataset generate_synthetic(const SyntheticOptions& options) {
  if (options.n < 10) throw InputError("synthetic n must be at least 10");
  if (options.p < 2) throw InputError("synthetic p must be at least 2");
  if (!(options.noise_std >= 0.0)) throw InputError("noise_std must be nonnegative");
  if (!(options.factor_loading >= 0.0 && options.factor_loading < 1.0)) {
    throw InputError("factor_loading must lie in [0, 1)");
  }

  const auto n = static_cast<Eigen::Index>(options.n);
  const auto p = static_cast<Eigen::Index>(options.p);

  Rng beta_rng(derive_seed(options.seed, "synthetic/beta"));
  Vector beta(p);
  for (Eigen::Index j = 0; j < p; ++j) beta(j) = 1.0 - beta_rng.uniform();  // (0, 1]
  beta /= beta.norm();

  Rng feature_rng(derive_seed(options.seed, "synthetic/features"));
  const double loading = options.factor_loading;
  const double unique = std::sqrt(1.0 - loading * loading);
  RawTable table;
  table.target_column = kTargetHeader;
  std::vector<Column> columns(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) columns[static_cast<std::size_t>(j)].name = "x" + std::to_string(j);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double factor = feature_rng.normal();
    for (Eigen::Index j = 0; j < p; ++j) {
      columns[static_cast<std::size_t>(j)].numbers.emplace_back(loading * factor +
                                                                unique * feature_rng.normal());
    }
  }
  table.columns = std::move(columns);
  Column placeholder;
  placeholder.name = kTargetHeader;
  placeholder.numbers.assign(options.n, 0.0);
  table.columns.push_back(std::move(placeholder));

  PreparedDataset data = standardize(table);
  if (data.features() != options.p) throw DegenerateData("synthetic generator produced a constant column");

  Rng noise_rng(derive_seed(options.seed, "synthetic/noise"));
  data.y = data.X * beta;
  if (options.noise_std > 0.0) {
    for (Eigen::Index i = 0; i < n; ++i) data.y(i) += options.noise_std * noise_rng.normal();
  }
  return data;
}

void write_prepared_csv(std::ostream& out, const PreparedDataset& data) {
  for (const auto& name : data.feature_names) out << quote_if_needed(name) << ',';
  out << kTargetHeader << '\n';
  for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) out << csv::format_double(data.X(i, j)) << ',';
    out << csv::format_double(data.y(i)) << '\n';
  }
}

PreparedDataset read_prepared_csv(std::istream& in) {
  std::string line;
  if (!csv::next_line(in, line)) throw InputError("prepared dataset is empty");
  auto header = csv::split_line(line);
  if (header.size() < 2 || header.back() != kTargetHeader) {
    throw InputError(std::string("prepared dataset header must end with ") + kTargetHeader);
  }
  const std::size_t p = header.size() - 1;
  std::vector<std::vector<double>> rows;
  std::size_t line_number = 1;
  while (csv::next_line(in, line)) {
    ++line_number;
    auto fields = csv::split_line(line);
    if (fields.size() != header.size()) {
      throw InputError("prepared dataset line " + std::to_string(line_number) + ": wrong field count");
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      auto value = csv::parse_double(fields[c]);
      if (!value || !std::isfinite(*value)) {
        throw InputError("prepared dataset line " + std::to_string(line_number) +
                         ": non-numeric or non-finite value");
      }
      row[c] = *value;
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < kMinRows) throw InputError("dataset too small");

  PreparedDataset data;
  data.feature_names.assign(header.begin(), header.end() - 1);
  data.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
  data.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      data.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    data.y(static_cast<Eigen::Index>(i)) = rows[i][p];
  }
  return data;
}

}  // namespace coldpref
