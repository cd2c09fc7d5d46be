#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nlchart {

enum class SemanticType { kQuantitative, kCategorical, kTemporalYear, kTemporalDate };

const char* to_string(SemanticType t);

/// Trimmed cell text; nullopt for an empty cell.
using Cell = std::optional<std::string>;

struct ColumnStats {
  double min = 0;
  double max = 0;
  double mean = 0;
};

struct Column {
  std::string name;
  SemanticType type = SemanticType::kCategorical;
  std::vector<std::string> distinct_values;  // first-seen order
  std::optional<ColumnStats> stats;           // quantitative only
};

class Dataset {
 public:
  Dataset() = default;
  /// Throws Error(kBadCsv) on ragged rows, duplicate or empty headers, or
  /// an empty document.
  static Dataset parse_csv(std::string_view text, std::string name = "dataset");
  static Dataset load_csv(const std::string& path);
  /// The bundled car-sales table (Brand, Country, Year, Date, Sales, Price).
  static const Dataset& sample();

  const std::string& name() const { return name_; }
  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }

  /// Case-insensitive column lookup.
  std::optional<std::size_t> column_index(std::string_view name) const;
  const Column* column(std::string_view name) const;
  /// Numeric value of a cell if it parses as a number.
  std::optional<double> number(std::size_t row, std::size_t col) const;

  /// Non-null numeric values of a column in row order.
  std::vector<double> numbers(std::size_t col) const;

  friend Dataset infer_types(Dataset dataset);

 private:
  std::string name_;
  std::vector<Column> columns_;
  std::vector<std::vector<Cell>> rows_;
};

/// Fills semantic types, distinct values and stats. Nulls do not vote; an
/// all-null column is categorical. Idempotent.
Dataset infer_types(Dataset dataset);

/// True for a 4-digit integer in the year range [1800, 2199].
bool is_year_literal(std::string_view s);

enum class IndexKind { kTable, kColumn, kValue };

const char* to_string(IndexKind k);

struct IndexEntry {
  std::string key;        // normalized phrase
  IndexKind kind = IndexKind::kColumn;
  std::string canonical;  // column name, cell value or table name
  std::string column;     // owning column for values
};

/// Normalized phrase -> dataset entity lookup for Stage 1.
class EntityIndex {
 public:
  static constexpr std::size_t kDefaultValueCap = 10000;

  /// Indexes the table name, every column name, and up to `value_cap`
  /// distinct values of each categorical column.
  static EntityIndex build(const Dataset& dataset, std::size_t value_cap = kDefaultValueCap);

  void add(IndexKind kind, std::string_view phrase, std::string canonical, std::string column = {});

  /// Entries whose key equals `key`, in tie-break order (column, table, value).
  std::vector<const IndexEntry*> lookup(std::string_view key) const;
  const std::vector<IndexEntry>& entries() const { return entries_; }
  std::size_t longest_tokens() const { return longest_tokens_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<IndexEntry> entries_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_key_;
  std::size_t longest_tokens_ = 0;
};

}  // namespace nlchart
