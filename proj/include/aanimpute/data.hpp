#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aanimpute/errors.hpp"
#include "aanimpute/text.hpp"

namespace aanimpute {

/// Records are stored one per row, contiguous, so row(i) can be viewed as a span.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> row_span(const RowMatrix& m, Eigen::Index r) {
  return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

enum class ColumnKind { numeric, binary, categorical };

inline std::string_view to_string(ColumnKind k) {
  switch (k) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::binary: return "binary";
    case ColumnKind::categorical: return "categorical";
  }
  return "numeric";
}

inline ColumnKind parse_column_kind(std::string_view s) {
  if (s == "numeric") return ColumnKind::numeric;
  if (s == "binary") return ColumnKind::binary;
  if (s == "categorical" || s == "categorical-coded") return ColumnKind::categorical;
  throw DomainError("unknown column kind '" + std::string(s) + "'");
}

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  double observed_min = 0.0;
  double observed_max = 0.0;

  /// Constant column; scaling is undefined so values normalize to 0.
  bool degenerate() const { return !(observed_max > observed_min); }
};

/// What the caller knows about a column before reading the file.
struct ColumnHint {
  std::string name;  // empty: take from header or generate A<k>
  ColumnKind kind = ColumnKind::numeric;
};

enum class SplitLabel { train, validation, test };

inline std::string_view to_string(SplitLabel s) {
  switch (s) {
    case SplitLabel::train: return "train";
    case SplitLabel::validation: return "validation";
    case SplitLabel::test: return "test";
  }
  return "train";
}

struct Dataset {
  std::vector<ColumnSpec> columns;
  RowMatrix rows;
  std::vector<SplitLabel> split;  // empty until split() runs
  bool normalized = false;

  std::size_t row_count() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t column_count() const { return columns.size(); }

  /// Rows carrying `label`, in file order.
  RowMatrix rows_with(SplitLabel label) const {
    if (split.size() != row_count()) throw DomainError("dataset has not been split");
    const auto n = std::count(split.begin(), split.end(), label);
    RowMatrix out(n, rows.cols());
    Eigen::Index k = 0;
    for (std::size_t r = 0; r < split.size(); ++r)
      if (split[r] == label) out.row(k++) = rows.row(static_cast<Eigen::Index>(r));
    return out;
  }
};

struct CsvOptions {
  bool header = true;
};

namespace detail {

inline double parse_cell(std::string_view token, std::size_t row, std::size_t col) {
  token = trim(token);
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (token.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(col) +
                         ": non-numeric token '" + std::string(token) + "'",
                     row, col);
  }
  return value;
}

}  // namespace detail

/// Reads a comma-separated table of reals. Rows and columns in error messages
/// are 1-based line/field positions in the file (the header counts as line 1).
///
/// With an empty `hints` the column count comes from the first line and every
/// column is numeric. Otherwise each line must have exactly hints.size() fields.
inline Dataset load_csv(std::istream& in, const std::vector<ColumnHint>& hints,
                        const CsvOptions& opts = {}) {
  std::vector<std::string> header_names;
  std::vector<std::vector<double>> cells;
  std::optional<std::size_t> width;
  if (!hints.empty()) width = hints.size();

  std::string line;
  std::size_t line_no = 0;
  bool header_pending = opts.header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, ',');
    if (!width) width = fields.size();
    if (fields.size() != *width) {
      throw ParseError("row " + std::to_string(line_no) + ": expected " + std::to_string(*width) +
                           " fields, found " + std::to_string(fields.size()),
                       line_no, fields.size());
    }
    if (header_pending) {
      header_pending = false;
      for (auto f : fields) header_names.emplace_back(trim(f));
      continue;
    }
    std::vector<double> values(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      values[c] = detail::parse_cell(fields[c], line_no, c + 1);
      if (!hints.empty() && hints[c].kind == ColumnKind::categorical &&
          values[c] != std::round(values[c])) {
        throw ParseError("row " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                             ": categorical column needs an integer code",
                         line_no, c + 1);
      }
    }
    cells.push_back(std::move(values));
  }
  if (cells.empty()) throw ParseError("empty file: no data rows");

  Dataset ds;
  const std::size_t n_cols = *width;
  ds.rows.resize(static_cast<Eigen::Index>(cells.size()), static_cast<Eigen::Index>(n_cols));
  for (std::size_t r = 0; r < cells.size(); ++r)
    for (std::size_t c = 0; c < n_cols; ++c)
      ds.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cells[r][c];

  ds.columns.resize(n_cols);
  for (std::size_t c = 0; c < n_cols; ++c) {
    auto& spec = ds.columns[c];
    if (!hints.empty() && !hints[c].name.empty())
      spec.name = hints[c].name;
    else if (!header_names.empty())
      spec.name = header_names[c];
    else
      spec.name = "A" + std::to_string(c + 1);
    spec.kind = hints.empty() ? ColumnKind::numeric : hints[c].kind;
    const auto col = ds.rows.col(static_cast<Eigen::Index>(c));
    spec.observed_min = col.minCoeff();
    spec.observed_max = col.maxCoeff();
    if (spec.kind == ColumnKind::binary) {
      std::set<double> distinct(col.begin(), col.end());
      if (distinct.size() > 2)
        throw ParseError("column '" + spec.name + "' is declared binary but has " +
                             std::to_string(distinct.size()) + " distinct values",
                         0, c + 1);
    }
  }
  return ds;
}

inline Dataset load_csv(const std::string& path, const std::vector<ColumnHint>& hints,
                        const CsvOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return load_csv(in, hints, opts);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.row(), e.column());
  }
}

/// Min-max scaling of one value; constant columns map to 0.
inline double normalize_value(double x, const ColumnSpec& spec) {
  if (spec.degenerate()) return 0.0;
  return std::clamp((x - spec.observed_min) / (spec.observed_max - spec.observed_min), 0.0, 1.0);
}

/// Inverse scaling back to file units; constant columns return their value.
inline double denormalize(double value, const ColumnSpec& spec) {
  if (spec.degenerate()) return spec.observed_min;
  return value * (spec.observed_max - spec.observed_min) + spec.observed_min;
}

enum class NormalizationScope { full, train };

/// Scales every cell into [0, 1] using per-column min/max.
///
/// With NormalizationScope::train the min/max are re-measured on the rows
/// labelled train (the dataset must already be split) and out-of-range values
/// in the other rows are clamped.
inline Dataset normalize(Dataset ds, NormalizationScope scope = NormalizationScope::full) {
  if (ds.normalized) throw DomainError("dataset is already normalized");
  if (scope == NormalizationScope::train) {
    const RowMatrix train = ds.rows_with(SplitLabel::train);
    for (std::size_t c = 0; c < ds.columns.size(); ++c) {
      ds.columns[c].observed_min = train.col(static_cast<Eigen::Index>(c)).minCoeff();
      ds.columns[c].observed_max = train.col(static_cast<Eigen::Index>(c)).maxCoeff();
    }
  }
  for (Eigen::Index r = 0; r < ds.rows.rows(); ++r)
    for (Eigen::Index c = 0; c < ds.rows.cols(); ++c)
      ds.rows(r, c) = normalize_value(ds.rows(r, c), ds.columns[static_cast<std::size_t>(c)]);
  ds.normalized = true;
  return ds;
}

struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

/// Chronological 50/25/25 split sizes: the test and validation blocks each
/// take floor(N/4) rows and training keeps the remainder.
inline SplitCounts split_counts(std::size_t n) {
  if (n < 4) throw DomainError("need at least 4 rows to split, got " + std::to_string(n));
  const std::size_t quarter = n / 4;
  return {n - 2 * quarter, quarter, quarter};
}

/// Labels rows in file order: train first, then validation, with the test
/// block as the final suffix.
inline Dataset split(Dataset ds) {
  const auto counts = split_counts(ds.row_count());
  ds.split.assign(ds.row_count(), SplitLabel::train);
  for (std::size_t r = counts.train; r < counts.train + counts.validation; ++r)
    ds.split[r] = SplitLabel::validation;
  for (std::size_t r = counts.train + counts.validation; r < ds.row_count(); ++r)
    ds.split[r] = SplitLabel::test;
  return ds;
}

/// Placeholder stored at unknown positions; never read as data.
inline constexpr double kMissingSentinel = 0.5;

/// One record with a known/unknown partition. Unknown entries of `record`
/// hold kMissingSentinel.
class ImputationTask {
 public:
  ImputationTask(std::vector<double> record, std::vector<bool> known_mask,
                 std::optional<std::vector<double>> true_values = std::nullopt,
                 std::size_t row_index = 0)
      : record_(std::move(record)),
        known_(std::move(known_mask)),
        truth_(std::move(true_values)),
        row_index_(row_index) {
    if (record_.size() != known_.size())
      throw DimensionError("record and known-mask lengths differ");
    if (truth_ && truth_->size() != record_.size())
      throw DimensionError("true_values length differs from record");
    for (std::size_t i = 0; i < known_.size(); ++i) {
      if (known_[i])
        known_idx_.push_back(i);
      else
        unknown_idx_.push_back(i);
    }
    if (unknown_idx_.empty()) throw DomainError("task has no unknown component");
    if (known_idx_.empty()) throw DomainError("task has no known component");
    for (auto u : unknown_idx_) record_[u] = kMissingSentinel;
  }

  std::span<const double> record() const { return record_; }
  const std::vector<bool>& known_mask() const { return known_; }
  const std::optional<std::vector<double>>& true_values() const { return truth_; }
  std::span<const std::size_t> unknown_indices() const { return unknown_idx_; }
  std::span<const std::size_t> known_indices() const { return known_idx_; }
  std::size_t size() const { return record_.size(); }
  std::size_t row_index() const { return row_index_; }

  /// Test hook: overwrite the placeholder at unknown slots.
  void set_sentinel(double value) {
    for (auto u : unknown_idx_) record_[u] = value;
  }

 private:
  std::vector<double> record_;
  std::vector<bool> known_;
  std::optional<std::vector<double>> truth_;
  std::size_t row_index_;
  std::vector<std::size_t> known_idx_;
  std::vector<std::size_t> unknown_idx_;
};

/// One task per test row with `missing_columns` hidden; the originals go to
/// true_values.
inline std::vector<ImputationTask> make_tasks(const Dataset& ds,
                                              const std::set<std::size_t>& missing_columns) {
  if (missing_columns.empty()) throw DomainError("no missing columns given");
  for (auto c : missing_columns)
    if (c >= ds.column_count())
      throw DomainError("missing column " + std::to_string(c) + " out of range");
  if (missing_columns.size() == ds.column_count())
    throw DomainError("every column is marked missing; nothing would be known");
  if (ds.split.size() != ds.row_count()) throw DomainError("dataset has not been split");

  std::vector<ImputationTask> tasks;
  const auto n = ds.column_count();
  for (std::size_t r = 0; r < ds.row_count(); ++r) {
    if (ds.split[r] != SplitLabel::test) continue;
    const auto row = row_span(ds.rows, static_cast<Eigen::Index>(r));
    std::vector<double> truth(row.begin(), row.end());
    std::vector<bool> mask(n, true);
    for (auto c : missing_columns) mask[c] = false;
    tasks.emplace_back(truth, std::move(mask), truth, r);
  }
  return tasks;
}

/// Audit export: column,min,max,kind,degenerate.
inline void write_normalization_csv(std::ostream& out, const std::vector<ColumnSpec>& columns) {
  out << "column,min,max,kind,degenerate\n";
  for (const auto& c : columns)
    out << c.name << ',' << format_double(c.observed_min) << ',' << format_double(c.observed_max)
        << ',' << to_string(c.kind) << ',' << (c.degenerate() ? 1 : 0) << '\n';
}

}  // namespace aanimpute
