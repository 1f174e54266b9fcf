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

// Final selection from the Pareto archive and the run's output files.

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "synpop/census_data.hpp"
#include "synpop/household_synthesis.hpp"
#include "synpop/nsga2.hpp"
#include "synpop/population_model.hpp"

namespace synpop {

// Weighted-sum minimization over objectives min-max normalized across the
// archive; ties go to the earliest member. Throws Error(kConfig) for an
// empty archive, a weight-length mismatch or all-zero/negative weights.
std::size_t SelectBest(std::span<const ObjectiveVector> archive, std::span<const double> weights);
std::size_t SelectBest(const ParetoArchive& archive, std::span<const double> weights);

// person_id, then one column per schema attribute (category codes), in
// roster order.
std::string PersonsCsv(const CandidatePopulation& candidate, const AttributeSchema& schema);
void ExportPersons(const CandidatePopulation& candidate, const AttributeSchema& schema,
                   const std::filesystem::path& path);
// Inverse of ExportPersons. Columns are matched by header name.
CandidatePopulation ParsePersonsCsv(std::string_view csv_text, const AttributeSchema& schema);
CandidatePopulation LoadPersons(const std::filesystem::path& path, const AttributeSchema& schema);

// household_id, size, composition, member_ids (semicolon-joined), in
// household roster order. `size_attribute` may be npos, in which case the
// composition's total size is written.
std::string HouseholdsCsv(const AllocationResult& result, const CandidatePopulation& households,
                          const AttributeSchema& schema, std::size_t composition_attribute,
                          std::size_t size_attribute);
void ExportHouseholds(const AllocationResult& result, const CandidatePopulation& households,
                      const AttributeSchema& schema, std::size_t composition_attribute,
                      std::size_t size_attribute, const std::filesystem::path& path);

// generation, objective, best, mean (normalized values as recorded).
std::string ConvergenceCsv(const GenerationHistory& history);
void ExportConvergence(const GenerationHistory& history, const std::filesystem::path& path);

// member_id, one min-max normalized column per objective, selected (0/1).
std::string ParetoPairsCsv(const ParetoArchive& archive, std::span<const std::string> names,
                           std::size_t selected);
void ExportParetoPairs(const ParetoArchive& archive, std::span<const std::string> names,
                       std::size_t selected, const std::filesystem::path& path);

struct RmseRow {
  std::string attribute;
  std::string level;  // "raw" or "grouped"
  double rmse = 0.0;
};

// Per attribute with a source table: RMSE between the rescaled table
// marginal and the candidate's counts, over raw bins and (when the attribute
// has a grouping) over group sums.
std::vector<RmseRow> RmseSummary(const CandidatePopulation& candidate,
                                 const AttributeSchema& schema,
                                 std::span<const ContingencyTable> tables);
std::string RmseCsv(std::span<const RmseRow> rows);

// Sums a per-category vector into the attribute's groups; unmapped
// categories are dropped.
std::vector<double> GroupSums(const AttributeDescriptor& attribute, std::span<const double> values);

// Binary archive snapshot so that `report` can re-select and re-export
// without re-running the search.
void SaveArchive(const ParetoArchive& archive, std::span<const std::string> objective_names,
                 const AttributeSchema& schema, const std::filesystem::path& path);
struct LoadedArchive {
  ParetoArchive archive;
  std::vector<std::string> objective_names;
};
LoadedArchive LoadArchive(const std::filesystem::path& path, const AttributeSchema& schema);

}  // namespace synpop
