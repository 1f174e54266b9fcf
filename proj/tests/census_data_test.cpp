// Copyright 2026 The synpop Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "synpop/census_data.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "synpop/error.hpp"
#include "test_support.hpp"

namespace synpop {
namespace {

using testing::TinySchema;

ContingencyTable SexAge() {
  return ParseContingencyTable("sex,age,count\nm,ch,2\nm,ad,3\nf,ch,5\n", TinySchema(), "sex_age");
}

ErrorKind KindOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIo;
}

TEST_CASE("schema lookup and grouping") {
  const auto schema = TinySchema();
  CHECK(schema.size() == 3);
  CHECK(schema.IndexOf("age") == 1);
  CHECK_FALSE(schema.Find("income"));
  const auto& age = schema.attribute(1);
  REQUIRE(age.has_grouping());
  CHECK(age.groups == std::vector<std::string>{"ch", "ad", "el"});
  CHECK(age.FindCategory("el") == 2u);
  CHECK_FALSE(schema.attribute(0).has_grouping());
  CHECK_THROWS_AS(schema.IndexOf("income"), Error);
}

TEST_CASE("partial grouping leaves bins unmapped") {
  const auto schema = ParseSchema(nlohmann::json::parse(
      R"({"attributes":[{"name":"a","categories":["x","y"],"grouping":{"x":"g"}}]})"));
  CHECK(schema.attribute(0).group_of[0] == 0);
  CHECK(schema.attribute(0).group_of[1] == kNoGroup);
}

TEST_CASE("schema rejects duplicates and unknown grouping codes") {
  CHECK_THROWS_AS(ParseSchema(nlohmann::json::parse(
                      R"({"attributes":[{"name":"a","categories":["x","x"]}]})")),
                  Error);
  CHECK_THROWS_AS(ParseSchema(nlohmann::json::parse(
                      R"({"attributes":[{"name":"a","categories":["x","y"],
                          "grouping":{"z":"g"}}]})")),
                  Error);
  CHECK_THROWS_AS(ParseSchema(nlohmann::json::parse(R"({"attrs":[]})")), Error);
}

TEST_CASE("table load computes total") {
  const auto table = SexAge();
  CHECK(table.total() == 10);
  const std::size_t coords[] = {1, 1};
  CHECK(table.count(coords) == 0);  // unlisted cell
}

TEST_CASE("table load errors") {
  const auto schema = TinySchema();
  auto message = [&](const std::string& csv) {
    try {
      ParseContingencyTable(csv, schema, "t");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kData);
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("sex,age,count\nm,XX,4\n").find("unknown category") != std::string::npos);
  CHECK(message("sex,age,count\n").find("no positive cell") != std::string::npos);
  CHECK(message("sex,age,count\nm,ch\n").find("malformed row") != std::string::npos);
  CHECK(message("sex,age,count\nm,ch,-1\n").find("negative count") != std::string::npos);
  CHECK(message("sex,age,count\nm,ch,1\nm,ch,2\n").find("duplicate cell") != std::string::npos);
  CHECK(message("sex,income,count\nm,1,2\n").find("unknown attribute") != std::string::npos);
}

TEST_CASE("missing table file names the path") {
  try {
    LoadContingencyTable("/nonexistent/t.csv", TinySchema(), "t");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kData);
    CHECK(std::string(e.what()).find("/nonexistent/t.csv") != std::string::npos);
  }
}

TEST_CASE("byte order mark and CRLF are tolerated") {
  const auto table =
      ParseContingencyTable("\xEF\xBB\xBFsex,count\r\nm,4\r\nf,6\r\n", TinySchema(), "sex");
  CHECK(table.total() == 10);
}

TEST_CASE("marginalize") {
  const auto table = SexAge();
  CHECK(Marginalize(table, "sex").values == std::vector<double>{5, 5});
  CHECK(Marginalize(table, "age").values == std::vector<double>{7, 3, 0});

  const auto single = ParseContingencyTable("age,count\nch,1\nad,4\nel,2\n", TinySchema(), "age");
  CHECK(Marginalize(single, "age").values == std::vector<double>{1, 4, 2});
  CHECK(KindOf([&] { Marginalize(table, "marital"); }) == ErrorKind::kData);
}

TEST_CASE("marginal sums equal the table total for every axis") {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> count(0, 20);
  const auto schema = TinySchema();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::int64_t> cells(2 * 3 * 2);
    for (auto& c : cells) c = count(gen);
    cells[0] += 1;
    ContingencyTable table("t", {"sex", "age", "marital"}, {2, 3, 2}, cells);
    for (const auto& axis : table.axes())
      CHECK(Marginalize(table, axis).sum() == static_cast<double>(table.total()));
  }
}

TEST_CASE("attribute weights") {
  FrequencyVector v{"a", {2, 3, 5}};
  const auto w = AttributeWeights(v);
  CHECK(w[0] == doctest::Approx(0.2));
  CHECK(w[1] == doctest::Approx(0.3));
  CHECK(w[2] == doctest::Approx(0.5));
  CHECK(AttributeWeights({"a", {4, 4}}) == std::vector<double>{0.5, 0.5});
  CHECK_THROWS_AS(AttributeWeights({"a", {0, 0, 0}}), Error);

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  for (int trial = 0; trial < 100; ++trial) {
    FrequencyVector r{"r", std::vector<double>(1 + trial % 9)};
    for (auto& x : r.values) x = u(gen);
    const auto p = AttributeWeights(r);
    double sum = 0.0;
    for (double x : p) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

RegionDataset TwoTables(std::int64_t total_a, std::int64_t total_b, std::int64_t target) {
  RegionDataset d;
  d.region_id = "r";
  d.person_schema = TinySchema();
  d.person_tables.emplace_back("a", std::vector<std::string>{"sex"}, std::vector<std::size_t>{2},
                               std::vector<std::int64_t>{total_a, 0});
  d.person_tables.emplace_back("b", std::vector<std::string>{"sex"}, std::vector<std::size_t>{2},
                               std::vector<std::int64_t>{0, total_b});
  d.target_persons = target;
  d.target_households = 1;
  return d;
}

TEST_CASE("validate dataset") {
  SUBCASE("consistent tables") {
    const auto report = ValidateDataset(TwoTables(100, 100, 100), 0.01);
    CHECK(report.flag_count() == 0);
    REQUIRE(report.discrepancies.size() == 1);
    CHECK(report.discrepancies[0].discrepancy == 0.0);
  }
  SUBCASE("table totals disagree") {
    const auto report = ValidateDataset(TwoTables(100, 98, 100), 0.01);
    REQUIRE(report.discrepancies.size() == 1);
    CHECK(report.discrepancies[0].flagged);
    CHECK(report.discrepancies[0].discrepancy == doctest::Approx(0.02).epsilon(1e-12));
  }
  SUBCASE("target count disagrees") {
    const auto report = ValidateDataset(TwoTables(100, 100, 90), 0.01);
    CHECK(report.discrepancies[0].flagged == false);
    bool target_flag = false;
    for (const auto& t : report.targets) target_flag = target_flag || t.flagged;
    CHECK(target_flag);
    CHECK(report.ToText().find("persons") != std::string::npos);
  }
}

TEST_CASE("table lookups") {
  const auto d = TwoTables(1, 1, 2);
  CHECK(FindTable(d.person_tables, "b") == &d.person_tables[1]);
  CHECK(FindTable(d.person_tables, "c") == nullptr);
  CHECK(FirstTableWith(d.person_tables, "sex") == &d.person_tables[0]);
  CHECK(FirstTableWith(d.person_tables, "age") == nullptr);
}

}  // namespace
}  // namespace synpop
