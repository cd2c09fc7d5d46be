#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "abstraction_oracle.hpp"
#include "nlchart/abstractor.hpp"

namespace nlchart {
namespace {

using testing::entity_bindings;
using testing::oracle_bindings;
using testing::SchemaGenerator;
using testing::UtteranceGenerator;

const char* kCars =
    "Brand,Country,Year,Sales,Price\n"
    "Ford,US,2010,100,20.5\n"
    "Toyota,Japan,2011,200,30\n"
    "Car Sales,China,2012,300,12\n";

EntityIndex cars_index() { return EntityIndex::build(Dataset::parse_csv(kCars, "cars")); }

std::vector<std::string> abstracted(std::string_view text) { return abstract(text, cars_index()).abstracted_tokens; }

TEST(Abstract, ColumnByColumn) {
  EXPECT_EQ(abstracted("Sales by year"), (std::vector<std::string>{"<column>", "by", "<column>"}));
}

TEST(Abstract, LongerPhraseWins) {
  auto a = abstract("show car sales in 2012", cars_index());
  EXPECT_EQ(a.abstracted_tokens, (std::vector<std::string>{"show", "<value>", "in", "<year>"}));
  ASSERT_EQ(a.bindings.size(), 2u);
  EXPECT_EQ(a.bindings[0].canonical, "Car Sales");
  EXPECT_EQ(a.bindings[0].column, "Brand");
  EXPECT_EQ(a.bindings[0].span, (TokenSpan{1, 3}));
  EXPECT_EQ(a.bindings[1].placeholder, "<year>");
  EXPECT_EQ(a.bindings[1].position, 3u);
}

TEST(Abstract, NumericLiterals) {
  EXPECT_EQ(abstracted("set width to 300 and opacity 0.5 on 2011-03-04"),
            (std::vector<std::string>{"set", "width", "to", "<integer>", "and", "opacity", "<float>", "on", "<date>"}));
}

TEST(Abstract, FuzzyMatchNeedsFiveCharacters) {
  auto a = abstract("color the toyotta bar", cars_index());
  ASSERT_EQ(a.bindings.size(), 1u);
  EXPECT_EQ(a.bindings[0].canonical, "Toyota");
  EXPECT_LT(a.bindings[0].match_score, 1.0);
  // "usa" is too short to fuzzy-match "US".
  EXPECT_TRUE(abstract("the usa bar", cars_index()).bindings.empty());
}

TEST(Abstract, QuotedTokensAreKept) {
  EXPECT_EQ(abstracted("title it \"Sales\""), (std::vector<std::string>{"title", "it", "\"Sales\""}));
}

TEST(Abstract, TableName) { EXPECT_EQ(abstracted("the cars chart")[1], "<table>"); }

TEST(Abstract, EmptyIndexOnlyAbstractsLiterals) {
  auto a = abstract("make sales 20 px", EntityIndex{});
  EXPECT_EQ(a.abstracted_tokens, (std::vector<std::string>{"make", "sales", "<integer>", "px"}));
}

TEST(Abstract, OriginalSpanMapsThroughMultiTokenBindings) {
  auto a = abstract("make car sales red", cars_index());
  EXPECT_EQ(a.original_span({1, 2}), (TokenSpan{1, 3}));
  EXPECT_EQ(a.original_span({2, 3}), (TokenSpan{3, 4}));
  EXPECT_EQ(a.original_span({0, 3}), (TokenSpan{0, 4}));
}

TEST(Property, MatchesExhaustiveOracle) {
  auto index = cars_index();
  UtteranceGenerator gen(20240611);
  for (int trial = 0; trial < 1000; ++trial) {
    auto text = gen.next();
    auto a = abstract(text, index);
    std::vector<Binding> entities;
    for (const auto& b : a.bindings) {
      if (b.placeholder == "<column>" || b.placeholder == "<value>" || b.placeholder == "<table>") entities.push_back(b);
    }
    auto expected = oracle_bindings(token_texts(text), index);
    ASSERT_EQ(entities.size(), expected.size()) << text;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      EXPECT_EQ(entities[i].span, expected[i].span) << text;
      EXPECT_EQ(entities[i].canonical, expected[i].canonical) << text;
      EXPECT_EQ(entities[i].column, expected[i].column) << text;
      EXPECT_NEAR(entities[i].match_score, expected[i].match_score, 1e-12) << text;
    }
  }
}

TEST(Property, ReconstructionAndAlignment) {
  auto index = cars_index();
  UtteranceGenerator gen(99);
  for (int trial = 0; trial < 1000; ++trial) {
    auto text = gen.next();
    auto a = abstract(text, index);
    ASSERT_EQ(a.reconstruct(), token_texts(text)) << text;
    std::size_t covered = 0;
    for (const auto& b : a.bindings) {
      ASSERT_LT(b.position, a.abstracted_tokens.size());
      EXPECT_EQ(a.abstracted_tokens[b.position], b.placeholder);
      EXPECT_EQ(a.original_span({b.position, b.position + 1}), b.span);
      covered += b.span.size() - 1;
      for (auto i = b.span.begin; i < b.span.end; ++i) EXPECT_FALSE(is_quoted(a.tokens[i].text));
    }
    EXPECT_EQ(a.abstracted_tokens.size() + covered, a.tokens.size());
  }
}

// Same oracle, but each trial draws a fresh table so column names and values
// vary in length, overlap and case.
TEST(Property, MatchesOracleOnRandomSchemas) {
  SchemaGenerator schemas(5);
  for (int trial = 0; trial < 500; ++trial) {
    auto schema = schemas.next();
    auto index = EntityIndex::build(Dataset::parse_csv(schema.csv, "t"));
    UtteranceGenerator gen(static_cast<std::uint64_t>(trial), schema.entities);
    auto text = gen.next();
    auto got = entity_bindings(abstract(text, index));
    auto expected = oracle_bindings(token_texts(text), index);
    ASSERT_EQ(got.size(), expected.size()) << text << "\n" << schema.csv;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      EXPECT_EQ(got[i].span, expected[i].span) << text;
      EXPECT_EQ(got[i].canonical, expected[i].canonical) << text;
      EXPECT_EQ(got[i].column, expected[i].column) << text;
    }
  }
}

}  // namespace
}  // namespace nlchart
