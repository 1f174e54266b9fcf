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

// Drives the synpop executable and checks exit codes and outputs.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "temp_files.hpp"

namespace {

namespace fs = std::filesystem;
using synpop::testing::ReadText;
using synpop::testing::TempDir;
using synpop::testing::WriteText;

const fs::path kFixture = SYNPOP_FIXTURE_DIR;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome Cli(const TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string command = std::string("\"") + SYNPOP_CLI_PATH + "\" " + args + " >\"" +
                              out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(command.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = ReadText(out);
  o.err = ReadText(err);
  return o;
}

// Small fixture config with absolute paths, written into `dir`.
nlohmann::json SmallConfig(const TempDir& dir) {
  auto doc = nlohmann::json::parse(ReadText(kFixture / "config_small.json"));
  doc["schema"] = (kFixture / "schema.json").string();
  for (auto& t : doc["person_tables"]) t["path"] = (kFixture / t["path"].get<std::string>()).string();
  for (auto& t : doc["household_tables"]) t["path"] = (kFixture / t["path"].get<std::string>()).string();
  doc["person_rules"] = (kFixture / "person_rules.json").string();
  doc["household_rules"] = (kFixture / "household_rules.json").string();
  doc["output_dir"] = (dir / "out").string();
  doc["persons"]["evolution"]["generations"] = 3;
  doc["households"]["evolution"]["generations"] = 3;
  return doc;
}

std::string Write(const TempDir& dir, const nlohmann::json& doc) {
  WriteText(dir / "config.json", doc.dump(2));
  return (dir / "config.json").string();
}

TEST_CASE("valid run exits 0 and prints progress") {
  TempDir dir("cli_ok");
  const auto config = Write(dir, SmallConfig(dir));
  const auto o = Cli(dir, "run -c " + config + " --workers 2");
  CHECK(o.code == 0);
  CHECK(o.out.find("persons gen 0 best") != std::string::npos);
  CHECK(o.out.find("households gen 3 best") != std::string::npos);
  CHECK(o.out.find("households complete:") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "manifest.json"));
}

TEST_CASE("flags override the config") {
  TempDir dir("cli_flags");
  const auto config = Write(dir, SmallConfig(dir));
  const auto o = Cli(dir, "generate-persons -q -c " + config +
                              " --generations 2 --population-size 6 --seed 9 --out-dir " +
                              (dir / "custom").string());
  CHECK(o.code == 0);
  CHECK(o.out.find(" gen ") == std::string::npos);
  CHECK(fs::exists(dir / "custom" / "persons.csv"));
  CHECK_FALSE(fs::exists(dir / "out"));
  const auto convergence = ReadText(dir / "custom" / "convergence_persons.csv");
  CHECK(convergence.find("\n2,") != std::string::npos);
  CHECK(convergence.find("\n3,") == std::string::npos);
}

TEST_CASE("missing table exits 1 and names the path") {
  TempDir dir("cli_missing");
  auto doc = SmallConfig(dir);
  doc["person_tables"][1]["path"] = (dir / "absent.csv").string();
  const auto o = Cli(dir, "run -c " + Write(dir, doc));
  CHECK(o.code == 1);
  CHECK(o.err.find((dir / "absent.csv").string()) != std::string::npos);
}

TEST_CASE("malformed table exits 1") {
  TempDir dir("cli_malformed");
  WriteText(dir / "broken.csv", "sex,count\nm,-4\n");
  auto doc = SmallConfig(dir);
  doc["person_tables"].push_back({{"name", "broken"}, {"path", (dir / "broken.csv").string()}});
  const auto o = Cli(dir, "validate-data -c " + Write(dir, doc));
  CHECK(o.code == 1);
  CHECK(o.err.find("negative count") != std::string::npos);
}

TEST_CASE("contradictory rules exit 2") {
  TempDir dir("cli_rules");
  WriteText(dir / "rules.json",
            R"({"rules":[{"name":"nobody","message":"no sex is allowed","when":{"sex":["m","f"]}}]})");
  auto doc = SmallConfig(dir);
  doc["person_rules"] = (dir / "rules.json").string();
  const auto o = Cli(dir, "generate-persons -c " + Write(dir, doc));
  CHECK(o.code == 2);
  CHECK(o.err.find("retries exhausted") != std::string::npos);
}

TEST_CASE("unwritable output exits 3") {
  TempDir dir("cli_io");
  WriteText(dir / "blocker", "a file, not a directory");
  const auto config = Write(dir, SmallConfig(dir));
  const auto o = Cli(dir, "validate-data -c " + config + " --out-dir " + (dir / "blocker" / "out").string());
  CHECK(o.code == 3);
  CHECK_FALSE(o.err.empty());
}

TEST_CASE("usage errors exit 1") {
  TempDir dir("cli_usage");
  CHECK(Cli(dir, "").code == 1);
  CHECK(Cli(dir, "run").code == 1);
  CHECK(Cli(dir, "run -c " + (dir / "nope.json").string()).code == 1);
  CHECK(Cli(dir, "--version").code == 0);
}

TEST_CASE("validate-data writes only inside the output directory") {
  TempDir dir("cli_validate");
  const auto config = Write(dir, SmallConfig(dir));
  CHECK(Cli(dir, "validate-data -q -c " + config).code == 0);
  std::size_t entries = 0;
  for (const auto& e : fs::directory_iterator(dir.path())) {
    ++entries;
    const auto name = e.path().filename().string();
    CHECK((name == "out" || name == "config.json" || name == "stdout.txt" || name == "stderr.txt"));
  }
  CHECK(entries == 4);
  CHECK(fs::exists(dir / "out" / "validation_report.txt"));
}

TEST_CASE("report re-exports after a run") {
  TempDir dir("cli_report");
  const auto config = Write(dir, SmallConfig(dir));
  REQUIRE(Cli(dir, "run -q -c " + config).code == 0);
  const auto households = ReadText(dir / "out" / "households.csv");
  fs::remove(dir / "out" / "households.csv");
  CHECK(Cli(dir, "report -c " + config).code == 0);
  CHECK(ReadText(dir / "out" / "households.csv") == households);
}

}  // namespace
