#include "nlchart/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "embedded.hpp"
#include "nlchart/error.hpp"
#include "nlchart/text.hpp"

namespace nlchart {

namespace {

// RFC-4180 subset: comma delimiter, double-quoted fields with "" escapes,
// LF or CRLF record ends.
std::vector<std::vector<std::string>> split_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  std::size_t line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      continue;
    } else if (c == '\n') {
      if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      any = false;
      ++line;
    } else {
      field += c;
    }
  }
  if (in_quotes) throw Error(Errc::kBadCsv, "unterminated quoted field near line " + std::to_string(line));
  if (any || !trim(field).empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace

const char* to_string(SemanticType t) {
  switch (t) {
    case SemanticType::kQuantitative: return "quantitative";
    case SemanticType::kCategorical: return "categorical";
    case SemanticType::kTemporalYear: return "temporalYear";
    case SemanticType::kTemporalDate: return "temporalDate";
  }
  return "?";
}

const char* to_string(IndexKind k) {
  switch (k) {
    case IndexKind::kTable: return "table";
    case IndexKind::kColumn: return "column";
    case IndexKind::kValue: return "value";
  }
  return "?";
}

bool is_year_literal(std::string_view s) {
  if (s.size() != 4 || !is_integer_literal(s)) return false;
  int v = std::stoi(std::string(s));
  return v >= 1800 && v <= 2199;
}

Dataset Dataset::parse_csv(std::string_view text, std::string name) {
  auto records = split_records(text);
  if (records.empty()) throw Error(Errc::kBadCsv, "empty file");
  Dataset ds;
  ds.name_ = std::move(name);
  std::set<std::string> seen;
  for (const auto& h : records[0]) {
    auto header = trim(h);
    if (header.empty()) throw Error(Errc::kBadCsv, "empty column header");
    if (!seen.insert(to_lower(header)).second) {
      throw Error(Errc::kBadCsv, "duplicate column header '" + header + "'");
    }
    ds.columns_.push_back(Column{header, SemanticType::kCategorical, {}, std::nullopt});
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != ds.columns_.size()) {
      throw Error(Errc::kBadCsv, "ragged row " + std::to_string(r) + ": expected " +
                                     std::to_string(ds.columns_.size()) + " fields, got " +
                                     std::to_string(records[r].size()));
    }
    std::vector<Cell> row;
    for (const auto& f : records[r]) {
      auto v = trim(f);
      row.push_back(v.empty() ? Cell{} : Cell{std::move(v)});
    }
    ds.rows_.push_back(std::move(row));
  }
  return infer_types(std::move(ds));
}

const Dataset& Dataset::sample() {
  static const Dataset data = parse_csv(embedded::kCarSales, "carsales");
  return data;
}

Dataset Dataset::load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto stem = path;
  if (auto slash = stem.find_last_of("/\\"); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (auto dot = stem.rfind('.'); dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
  return parse_csv(buf.str(), stem);
}

std::optional<std::size_t> Dataset::column_index(std::string_view name) const {
  auto key = to_lower(name);
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (to_lower(columns_[i].name) == key) return i;
  }
  return std::nullopt;
}

const Column* Dataset::column(std::string_view name) const {
  auto i = column_index(name);
  return i ? &columns_[*i] : nullptr;
}

std::optional<double> Dataset::number(std::size_t row, std::size_t col) const {
  const auto& cell = rows_.at(row).at(col);
  if (!cell) return std::nullopt;
  return parse_number(*cell);
}

std::vector<double> Dataset::numbers(std::size_t col) const {
  std::vector<double> out;
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (auto v = number(r, col)) out.push_back(*v);
  }
  return out;
}

Dataset infer_types(Dataset ds) {
  for (std::size_t c = 0; c < ds.columns_.size(); ++c) {
    auto& col = ds.columns_[c];
    bool any = false, years = true, dates = true, numeric = true;
    double sum = 0, lo = 0, hi = 0;
    std::size_t n = 0;
    std::vector<std::string> distinct;
    std::set<std::string> seen;
    for (const auto& row : ds.rows_) {
      const auto& cell = row[c];
      if (!cell) continue;
      any = true;
      if (seen.insert(*cell).second) distinct.push_back(*cell);
      years = years && is_year_literal(*cell);
      dates = dates && is_date_literal(*cell);
      auto v = parse_number(*cell);
      numeric = numeric && v.has_value();
      if (v) {
        lo = n == 0 ? *v : std::min(lo, *v);
        hi = n == 0 ? *v : std::max(hi, *v);
        sum += *v;
        ++n;
      }
    }
    col.distinct_values = std::move(distinct);
    col.stats.reset();
    if (!any) {
      col.type = SemanticType::kCategorical;
    } else if (years) {
      col.type = SemanticType::kTemporalYear;
    } else if (dates) {
      col.type = SemanticType::kTemporalDate;
    } else if (numeric) {
      col.type = SemanticType::kQuantitative;
      col.stats = ColumnStats{lo, hi, sum / static_cast<double>(n)};
    } else {
      col.type = SemanticType::kCategorical;
    }
  }
  return ds;
}

EntityIndex EntityIndex::build(const Dataset& dataset, std::size_t value_cap) {
  EntityIndex index;
  for (const auto& col : dataset.columns()) index.add(IndexKind::kColumn, col.name, col.name);
  if (!dataset.name().empty()) index.add(IndexKind::kTable, dataset.name(), dataset.name());
  for (const auto& col : dataset.columns()) {
    if (col.type != SemanticType::kCategorical) continue;
    std::size_t limit = std::min(value_cap, col.distinct_values.size());
    for (std::size_t i = 0; i < limit; ++i) {
      index.add(IndexKind::kValue, col.distinct_values[i], col.distinct_values[i], col.name);
    }
  }
  return index;
}

void EntityIndex::add(IndexKind kind, std::string_view phrase, std::string canonical, std::string column) {
  auto key = normalize_phrase(phrase);
  if (key.empty()) return;
  auto& slots = by_key_[key];
  for (auto i : slots) {
    const auto& e = entries_[i];
    if (e.kind == kind && e.canonical == canonical && e.column == column) return;
  }
  longest_tokens_ = std::max(longest_tokens_, token_texts(key).size());
  slots.push_back(entries_.size());
  entries_.push_back(IndexEntry{std::move(key), kind, std::move(canonical), std::move(column)});
}

std::vector<const IndexEntry*> EntityIndex::lookup(std::string_view key) const {
  std::vector<const IndexEntry*> out;
  auto it = by_key_.find(key);
  if (it == by_key_.end()) return out;
  for (auto i : it->second) out.push_back(&entries_[i]);
  auto rank = [](IndexKind k) { return k == IndexKind::kColumn ? 0 : k == IndexKind::kTable ? 1 : 2; };
  std::stable_sort(out.begin(), out.end(),
                   [&](const IndexEntry* a, const IndexEntry* b) { return rank(a->kind) < rank(b->kind); });
  return out;
}

}  // namespace nlchart
