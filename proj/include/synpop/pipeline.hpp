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

// Run configuration and the two-stage person -> household pipeline.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "synpop/census_data.hpp"
#include "synpop/fitness.hpp"
#include "synpop/household_synthesis.hpp"
#include "synpop/nsga2.hpp"
#include "synpop/population_model.hpp"

namespace synpop {

struct TableRef {
  std::string name;
  std::filesystem::path path;
};

struct StageConfig {
  std::vector<ObjectiveSpec> objectives;
  EvolutionConfig evolution;
  std::vector<std::pair<std::string, std::string>> weight_sources;  // attribute -> table
  std::optional<std::string> joint_table;
};

struct RunConfig {
  std::string region_id;
  std::filesystem::path schema;
  std::vector<TableRef> person_tables;
  std::vector<TableRef> household_tables;
  std::optional<std::filesystem::path> person_rules;
  std::optional<std::filesystem::path> household_rules;
  std::filesystem::path output_dir = "out";
  std::int64_t target_persons = 0;
  std::int64_t target_households = 0;
  std::string age_attribute = "age";
  std::string composition_attribute = "composition";
  std::string size_attribute = "size";
  AllocationOrder allocation_order = AllocationOrder::kLargestFirst;
  double tolerance = 0.01;
  bool strict = false;
  std::size_t workers = 1;
  StageConfig persons;
  StageConfig households;

  // Relative paths resolve against `base_dir`. Accepts either a config
  // document or a run manifest (its "config" member). Throws Error(kConfig).
  static RunConfig FromJson(const nlohmann::json& doc, const std::filesystem::path& base_dir);
  static RunConfig Load(const std::filesystem::path& path);

  // Every setting that influences results. Paths are absolute. The output
  // directory and worker count are left out: they do not change results.
  nlohmann::json Snapshot() const;

  // Throws Error(kConfig) naming the first missing input path.
  void CheckPaths() const;
};

using StageProgressFn = std::function<void(const std::string& stage, const GenerationRecord&)>;

struct StageResult {
  EvolutionResult evolution;
  std::size_t selected = 0;  // index into evolution.archive.members()
  std::vector<std::string> objective_names;
  std::vector<double> weights;

  const ArchiveMember& selected_member() const { return evolution.archive.members().at(selected); }
};

class Pipeline {
 public:
  explicit Pipeline(RunConfig config);

  const RunConfig& config() const { return config_; }
  const RegionDataset& dataset() const { return dataset_; }
  void set_progress(StageProgressFn progress) { progress_ = std::move(progress); }

  // Writes validation_report.txt. In strict mode any flag raises
  // Error(kData) after the report is written.
  ValidationReport ValidateData();

  // Stage one: evolve, select and export persons.
  void GeneratePersons();
  // Stage two: evolve households, allocate the stage-one persons (from
  // memory, or persons.csv in the output directory) and export.
  void GenerateHouseholds();
  // validate -> persons -> households -> manifest.
  void Run();
  // Re-select and re-export from the archives saved by an earlier run.
  void Report();

  const std::optional<StageResult>& persons_result() const { return persons_; }
  const std::optional<StageResult>& households_result() const { return households_; }
  const std::optional<AllocationResult>& allocation() const { return allocation_; }

  EntityModel PersonModel() const;
  EntityModel HouseholdModel() const;

 private:
  std::filesystem::path Out(const std::string& file) const { return config_.output_dir / file; }
  void EnsureOutputDir() const;
  void ExportPersonStage();
  void ExportHouseholdStage();
  void WriteManifest() const;

  RunConfig config_;
  RegionDataset dataset_;
  std::vector<ValidationRule> person_rules_;
  std::vector<ValidationRule> household_rules_;
  StageProgressFn progress_;

  std::optional<StageResult> persons_;
  std::optional<StageResult> households_;
  std::shared_ptr<const CandidatePopulation> selected_persons_;
  std::shared_ptr<const CandidatePopulation> selected_households_;
  std::optional<AllocationResult> allocation_;
};

}  // namespace synpop
