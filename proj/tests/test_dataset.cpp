#include <gtest/gtest.h>

#include "nlchart/dataset.hpp"
#include "nlchart/error.hpp"

namespace nlchart {
namespace {

TEST(Csv, QuotedFieldsAndCrlf) {
  auto ds = Dataset::parse_csv("Name,Note\r\n\"Smith, J\",\"said \"\"hi\"\"\"\r\nLee,\r\n");
  ASSERT_EQ(ds.rows().size(), 2u);
  EXPECT_EQ(*ds.rows()[0][0], "Smith, J");
  EXPECT_EQ(*ds.rows()[0][1], "said \"hi\"");
  EXPECT_FALSE(ds.rows()[1][1].has_value());
}

TEST(Csv, RejectsMalformedInput) {
  auto code = [](std::string_view text) {
    try {
      Dataset::parse_csv(text);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::kIo;
  };
  EXPECT_EQ(code(""), Errc::kBadCsv);
  EXPECT_EQ(code("a,b\n1\n"), Errc::kBadCsv);
  EXPECT_EQ(code("a,A\n1,2\n"), Errc::kBadCsv);
  EXPECT_EQ(code("a,,c\n1,2,3\n"), Errc::kBadCsv);
  EXPECT_EQ(code("a\n\"open\n"), Errc::kBadCsv);
}

TEST(Types, InferenceOrder) {
  auto ds = Dataset::parse_csv(
      "Year,Date,Price,Brand,Empty\n"
      "2010,2010-01-02,120.5,Ford,\n"
      "2011,2011-03-04,98,BMW,\n"
      ",2012-05-06,3,Ford,\n");
  EXPECT_EQ(ds.column("year")->type, SemanticType::kTemporalYear);
  EXPECT_EQ(ds.column("Date")->type, SemanticType::kTemporalDate);
  EXPECT_EQ(ds.column("Price")->type, SemanticType::kQuantitative);
  EXPECT_EQ(ds.column("Brand")->type, SemanticType::kCategorical);
  EXPECT_EQ(ds.column("Empty")->type, SemanticType::kCategorical);
  // Oracle: (120.5 + 98 + 3) / 3
  const auto& stats = *ds.column("Price")->stats;
  EXPECT_NEAR(stats.mean, 221.5 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(stats.min, 3);
  EXPECT_DOUBLE_EQ(stats.max, 120.5);
  EXPECT_EQ(ds.column("Brand")->distinct_values, (std::vector<std::string>{"Ford", "BMW"}));
}

TEST(Types, InferenceIsIdempotent) {
  auto ds = Dataset::parse_csv("x,y\n1,a\n2,b\n");
  auto again = infer_types(ds);
  for (std::size_t c = 0; c < ds.columns().size(); ++c) {
    EXPECT_EQ(ds.columns()[c].type, again.columns()[c].type);
    EXPECT_EQ(ds.columns()[c].distinct_values, again.columns()[c].distinct_values);
  }
}

TEST(Types, YearBounds) {
  EXPECT_TRUE(is_year_literal("1800"));
  EXPECT_TRUE(is_year_literal("2199"));
  EXPECT_FALSE(is_year_literal("1799"));
  EXPECT_FALSE(is_year_literal("2200"));
  EXPECT_FALSE(is_year_literal("20100"));
}

TEST(Index, ColumnsTableAndCategoricalValues) {
  auto ds = Dataset::parse_csv("Brand,Sales,Year\nFord,10,2010\nCar Sales,20,2011\n", "cars");
  auto index = EntityIndex::build(ds);
  ASSERT_EQ(index.lookup("sales").size(), 1u);
  EXPECT_EQ(index.lookup("sales")[0]->kind, IndexKind::kColumn);
  EXPECT_EQ(index.lookup("cars")[0]->kind, IndexKind::kTable);
  ASSERT_EQ(index.lookup("car sales").size(), 1u);
  EXPECT_EQ(index.lookup("car sales")[0]->column, "Brand");
  EXPECT_TRUE(index.lookup("10").empty());
  EXPECT_TRUE(index.lookup("2010").empty());
  EXPECT_EQ(index.longest_tokens(), 2u);
}

TEST(Index, ValueCapLimitsEachColumn) {
  std::string csv = "Id\n";
  for (int i = 0; i < 50; ++i) csv += "v" + std::to_string(i) + "x\n";
  auto index = EntityIndex::build(Dataset::parse_csv(csv), 10);
  EXPECT_EQ(index.entries().size(), 1u + 1u + 10u);
}

TEST(Index, LookupPrefersColumnOverValue) {
  auto ds = Dataset::parse_csv("Country,Region\nRegion,x\n");
  auto hits = EntityIndex::build(ds).lookup("region");
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0]->kind, IndexKind::kColumn);
  EXPECT_EQ(hits[1]->kind, IndexKind::kValue);
}

}  // namespace
}  // namespace nlchart
