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

#include "synpop/pipeline.hpp"

#include <filesystem>

#include "doctest.h"
#include "synpop/error.hpp"
#include "synpop/reporting.hpp"
#include "test_support.hpp"

namespace synpop {
namespace {

namespace fs = std::filesystem;

const fs::path kSmall = SYNPOP_FIXTURE_DIR "/config_small.json";

RunConfig SmallConfig(const fs::path& out, std::size_t generations = 5) {
  auto config = RunConfig::Load(kSmall);
  config.output_dir = out;
  config.persons.evolution.generations = generations;
  config.households.evolution.generations = generations;
  return config;
}

std::size_t FileCount(const fs::path& dir) {
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n;
  return n;
}

TEST_CASE("config load resolves paths against the config file") {
  const auto config = RunConfig::Load(kSmall);
  CHECK(config.schema.is_absolute());
  CHECK(config.schema == fs::path(SYNPOP_FIXTURE_DIR) / "schema.json");
  CHECK(config.person_tables.size() == 4);
  CHECK(config.persons.objectives.size() == 5);
  CHECK(config.households.joint_table == std::optional<std::string>("size_type_composition"));
  CHECK_NOTHROW(config.CheckPaths());
}

TEST_CASE("config errors are configuration errors") {
  try {
    RunConfig::Load("/nonexistent/config.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
  }
  auto bad = nlohmann::json::parse(testing::ReadText(kSmall));
  bad["allocation_order"] = "random";
  CHECK_THROWS_AS(RunConfig::FromJson(bad, SYNPOP_FIXTURE_DIR), Error);

  auto missing = RunConfig::Load(kSmall);
  missing.person_tables[0].path = "/nonexistent/table.csv";
  try {
    missing.CheckPaths();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
    CHECK(std::string(e.what()).find("/nonexistent/table.csv") != std::string::npos);
  }
}

TEST_CASE("snapshot omits run-local settings") {
  auto a = RunConfig::Load(kSmall);
  auto b = a;
  b.output_dir = "/elsewhere";
  b.workers = 8;
  CHECK(a.Snapshot() == b.Snapshot());
  b.persons.evolution.seed = 7;
  CHECK_FALSE(a.Snapshot() == b.Snapshot());
}

TEST_CASE("validate-data writes only the report") {
  testing::TempDir dir("validate");
  Pipeline pipeline(SmallConfig(dir.path()));
  const auto report = pipeline.ValidateData();
  CHECK(fs::exists(dir / "validation_report.txt"));
  CHECK(FileCount(dir.path()) == 1);
  CHECK(report.flag_count() > 0);  // small targets differ from table totals

  auto strict = SmallConfig(dir.path());
  strict.strict = true;
  Pipeline strict_pipeline(strict);
  try {
    strict_pipeline.ValidateData();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kData);
  }
}

TEST_CASE("full run writes every output and reproduces from its manifest") {
  testing::TempDir dir("run");
  Pipeline pipeline(SmallConfig(dir / "a"));
  pipeline.Run();
  for (const char* name :
       {"validation_report.txt", "persons.csv", "households.csv", "convergence_persons.csv",
        "convergence_households.csv", "pareto_persons.csv", "pareto_households.csv",
        "rmse_summary.csv", "persons_archive.bin", "households_archive.bin", "manifest.json",
        "timings.json"})
    CHECK_MESSAGE(fs::exists(dir / "a" / name), name);

  const auto manifest = nlohmann::json::parse(testing::ReadText(dir / "a" / "manifest.json"));
  CHECK(manifest.at("region_id") == "MSOA-DEMO");
  CHECK(manifest.at("persons").at("objectives").size() == 5);

  auto again = RunConfig::Load(dir / "a" / "manifest.json");
  again.output_dir = dir / "b";
  Pipeline rerun(again);
  rerun.Run();
  for (const char* name : {"persons.csv", "households.csv", "manifest.json", "pareto_persons.csv"})
    CHECK_MESSAGE(testing::ReadText(dir / "a" / name) == testing::ReadText(dir / "b" / name), name);

  const auto schema = pipeline.dataset().person_schema;
  const auto persons = LoadPersons(dir / "a" / "persons.csv", schema);
  CHECK(persons.size() == 200);
  CHECK(persons == *pipeline.persons_result()->selected_member().candidate);
}

TEST_CASE("households stage reloads persons from disk") {
  testing::TempDir dir("stages");
  Pipeline first(SmallConfig(dir.path()));
  first.GeneratePersons();
  Pipeline second(SmallConfig(dir.path()));
  second.GenerateHouseholds();
  REQUIRE(second.allocation());
  CHECK(fs::exists(dir / "households.csv"));
  std::size_t members = second.allocation()->unallocated.size();
  for (const auto& h : second.allocation()->households) members += h.members.size();
  CHECK(members == 200);
}

TEST_CASE("report re-exports from saved archives") {
  testing::TempDir dir("report");
  Pipeline pipeline(SmallConfig(dir.path()));
  pipeline.Run();
  const auto persons = testing::ReadText(dir / "persons.csv");
  fs::remove(dir / "persons.csv");
  fs::remove(dir / "pareto_persons.csv");
  Pipeline report(SmallConfig(dir.path()));
  report.Report();
  CHECK(testing::ReadText(dir / "persons.csv") == persons);
  CHECK(fs::exists(dir / "pareto_persons.csv"));
}

}  // namespace
}  // namespace synpop
